import numpy as np
import pytest
from PIL import Image

from framework.errors import DomainError, EmptyFieldError
from models.dent import HeightField
from models.report import HeatmapSpec
from services.heatmap import colorize, rasterize_points, render_heatmap

RAMP = HeatmapSpec(scale=1.0)


def _field(heights):
    return HeightField(spacing=1.0, origin_x=0.0, origin_y=0.0, heights=np.ma.masked_invalid(heights))


def test_zero_renders_blue_and_scale_renders_red():
    rgb = colorize(_field([[0.0, 1.0, -3.0]]), RAMP)
    assert rgb[0].tolist() == [[0, 0, 255], [255, 0, 0], [255, 0, 0]]


def test_masked_cells_use_the_sentinel():
    rgb = colorize(_field([[0.5, np.nan]]), RAMP)
    assert rgb[0, 1].tolist() == [128, 128, 128]


def test_row_zero_is_the_largest_y():
    rgb = colorize(_field([[0.0], [1.0]]), RAMP)
    assert rgb[0, 0].tolist() == [255, 0, 0]
    assert rgb[1, 0].tolist() == [0, 0, 255]


def test_render_writes_a_binary_ppm(tmp_path):
    path = tmp_path / "ramp.ppm"
    values = np.linspace(0.0, 1.0, 11)[np.newaxis, :]
    render_heatmap(_field(values), RAMP, path)

    assert path.read_bytes().startswith(b"P6")
    with Image.open(path) as image:
        assert image.size == (11, 1)
        pixels = np.asarray(image.convert("RGB"))[0]
    assert np.all(np.diff(pixels[:, 0].astype(int)) >= 0)
    assert np.all(np.diff(pixels[:, 2].astype(int)) <= 0)
    assert pixels[0].tolist() == [0, 0, 255]
    assert pixels[-1].tolist() == [255, 0, 0]


def test_render_of_an_empty_field_fails(tmp_path):
    with pytest.raises(EmptyFieldError):
        render_heatmap(_field([[np.nan, np.nan]]), RAMP, tmp_path / "empty.ppm")
    assert list(tmp_path.iterdir()) == []


def test_render_into_a_missing_directory_leaves_nothing(tmp_path):
    target = tmp_path / "missing" / "map.ppm"
    with pytest.raises(OSError):
        render_heatmap(_field([[0.5]]), RAMP, target)
    assert not target.exists()


def test_rasterize_mean_and_min():
    xy = np.array([[0.0, 0.0], [0.1, 0.0], [1.0, 0.0], [0.0, 2.0]])
    values = np.array([1.0, 3.0, 5.0, 7.0])

    mean = rasterize_points(xy, values, pitch=1.0)
    assert (mean.rows, mean.cols) == (3, 2)
    assert mean.heights[0, 0] == 2.0
    assert mean.heights[0, 1] == 5.0
    assert mean.heights[2, 0] == 7.0
    assert mean.support.sum() == 3

    low = rasterize_points(xy, values, pitch=1.0, reducer="min")
    assert low.heights[0, 0] == 1.0


def test_rasterize_rejects_bad_input():
    with pytest.raises(EmptyFieldError):
        rasterize_points(np.zeros((0, 2)), np.zeros(0), pitch=1.0)
    with pytest.raises(DomainError):
        rasterize_points(np.zeros((1, 2)), np.zeros(1), pitch=0.0)
    with pytest.raises(DomainError):
        rasterize_points(np.zeros((1, 2)), np.zeros(1), pitch=1.0, reducer="max")
