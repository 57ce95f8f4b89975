import math

import numpy as np
import pytest

from framework.errors import DomainError, ResourceLimitError
from models.dent import DentParams, RefPoint
from services.model_core import (
    PRESETS,
    EXAMPLE_ROWS,
    boundary_half_width,
    dent_depth,
    grid_axis,
    max_depth_point,
    radial_ratio,
    radial_ratio_array,
    radial_ratio_gradient,
    ref_dent,
    ref_dent_array,
    sample_height_field,
)


def test_boundary_touches_box():
    for p in (0.5, 1.0, 1.5):
        assert boundary_half_width(-0.5, p) == pytest.approx(0.0, abs=1e-12)
        assert boundary_half_width(0.5, p) == pytest.approx(0.0, abs=1e-12)
        # the widest point reaches y = 0.5
        x_widest = 0.5 ** (1.0 / p) - 0.5
        assert boundary_half_width(x_widest, p) == pytest.approx(0.5, abs=1e-12)


def test_p1_boundary_is_a_circle():
    for x in np.linspace(-0.5, 0.5, 21):
        f = boundary_half_width(float(x), 1.0)
        assert x * x + f * f == pytest.approx(0.25, abs=1e-12)


def test_boundary_rejects_out_of_range():
    with pytest.raises(DomainError):
        boundary_half_width(0.6, 1.0)
    with pytest.raises(DomainError):
        boundary_half_width(0.0, 2.0)


def test_radial_ratio_values():
    assert radial_ratio(RefPoint(x=0.0, y=0.0), 1.0) == 0.0
    # p = 1: r is twice the distance to the origin
    assert radial_ratio(RefPoint(x=0.1, y=0.2), 1.0) == pytest.approx(2 * math.hypot(0.1, 0.2), abs=1e-12)
    for p in (0.7, 1.0, 1.3):
        for x in (-0.4, -0.1, 0.2, 0.45):
            f = boundary_half_width(x, p)
            assert radial_ratio(RefPoint(x=x, y=f), p) == pytest.approx(1.0, abs=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    step = 1e-6
    checked = 0
    while checked < 1000:
        x, y = rng.uniform(-0.45, 0.45, size=2)
        p = rng.uniform(0.5, 1.5)
        if math.hypot(x, y) < 0.05:
            continue
        drdx, drdy = radial_ratio_gradient(RefPoint(x=x, y=y), p)
        fx = (radial_ratio_array(x + step, y, p) - radial_ratio_array(x - step, y, p)) / (2 * step)
        fy = (radial_ratio_array(x, y + step, p) - radial_ratio_array(x, y - step, p)) / (2 * step)
        scale = max(1.0, abs(drdx), abs(drdy))
        assert drdx == pytest.approx(float(fx), abs=1e-5 * scale)
        assert drdy == pytest.approx(float(fy), abs=1e-5 * scale)
        checked += 1


def test_gradient_undefined_at_origin():
    with pytest.raises(DomainError):
        radial_ratio_gradient(RefPoint(x=0.0, y=0.0), 1.0)


def test_peak_is_one_at_center_and_shift():
    assert ref_dent(RefPoint(x=0.0, y=0.0), b=2.0, p=1.0) == 1.0
    assert ref_dent(RefPoint(x=-0.2, y=-0.1), b=math.e, p=0.7, s_x=-0.2, s_y=-0.1) == 1.0


def test_shifted_peak_is_a_local_maximum():
    s_x, s_y = 0.2, 0.05
    for dx, dy in ((1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3)):
        value = ref_dent(RefPoint(x=s_x + dx, y=s_y + dy), b=3.0, p=1.1, s_x=s_x, s_y=s_y)
        assert value < 1.0
        assert value == pytest.approx(1.0, abs=1e-4)


def test_vanishes_at_the_boundary():
    x = 0.999 * 0.5
    assert radial_ratio(RefPoint(x=x, y=0.0), 1.0) == pytest.approx(0.999)
    assert ref_dent(RefPoint(x=x, y=0.0), b=math.e, p=1.0) < 1e-6
    # shifted branch must vanish on both sides of the shift
    assert ref_dent(RefPoint(x=x, y=0.0), b=math.e, p=1.0, s_x=0.2) < 1e-6
    assert ref_dent(RefPoint(x=-x, y=0.0), b=math.e, p=1.0, s_x=0.2) < 1e-6


def test_outside_support_is_undefined():
    assert ref_dent(RefPoint(x=0.5, y=0.0)) is None
    assert ref_dent(RefPoint(x=0.0, y=0.6)) is None
    values = ref_dent_array(np.array([0.0, 0.0]), np.array([0.0, 0.6]), math.e, 1.0)
    assert values.mask.tolist() == [False, True]


def test_branches_agree_as_shift_vanishes():
    for x, y in ((0.1, 0.1), (-0.3, 0.05), (0.2, -0.35)):
        pt = RefPoint(x=x, y=y)
        unshifted = ref_dent(pt, b=2.5, p=1.2)
        nearly = ref_dent(pt, b=2.5, p=1.2, s_x=1e-10, s_y=0.0)
        assert nearly == pytest.approx(unshifted, abs=1e-8)


def test_invalid_shape_parameters():
    pt = RefPoint(x=0.0, y=0.0)
    with pytest.raises(DomainError):
        ref_dent(pt, b=1.0)
    with pytest.raises(DomainError):
        ref_dent(pt, p=0.0)
    with pytest.raises(DomainError):
        # inside the box but outside the egg boundary
        ref_dent(pt, p=1.0, s_x=0.45, s_y=0.45)


def test_dent_depth_scales_the_reference():
    params = EXAMPLE_ROWS["row1"]
    assert dent_depth(0.0, 0.0, params) == 5.0
    assert dent_depth(16.0, 0.0, params) is None
    expected = params.d * ref_dent(RefPoint(x=6.0 / 30, y=3.0 / 30), b=2.0, p=1.0)
    assert dent_depth(6.0, 3.0, params) == pytest.approx(expected, rel=1e-12)


def test_grid_axis_is_odd_and_centered():
    axis = grid_axis(15.0, 0.5)
    assert len(axis) % 2 == 1
    assert axis[len(axis) // 2] == 0.0
    assert axis[-1] >= 15.0


def test_sample_height_field_errors(row1):
    with pytest.raises(DomainError):
        sample_height_field(row1, 0.0)
    with pytest.raises(DomainError):
        sample_height_field(row1, 1.0, margin=-1.0)
    with pytest.raises(ResourceLimitError):
        sample_height_field(row1, 1.0, cell_cap=10)


@pytest.mark.parametrize("name", sorted(EXAMPLE_ROWS))
def test_example_rows_golden_shapes(name):
    params = EXAMPLE_ROWS[name]
    spacing = 0.5
    field = sample_height_field(params, spacing)
    heights = np.asarray(field.heights.filled(0.0))
    X, Y = field.cell_centers()

    deepest = np.unravel_index(np.argmin(heights), heights.shape)
    s_x, s_y, d = max_depth_point(params)
    assert -heights[deepest] == pytest.approx(d, rel=1e-9)
    assert abs(X[deepest] - s_x) <= spacing
    assert abs(Y[deepest] - s_y) <= spacing

    support = field.support
    extent_x = X[support].max() - X[support].min() + spacing
    extent_y = Y[support].max() - Y[support].min() + spacing
    assert abs(extent_x - params.l) <= spacing
    assert abs(extent_y - params.w) <= spacing


def test_heights_are_non_positive(row1):
    field = sample_height_field(row1, 1.0, margin=3.0)
    assert field.heights.max() <= 0.0
    # margin cells fall outside the support
    assert not field.support[0].any()


def test_presets_are_valid_parameter_sets():
    assert set(EXAMPLE_ROWS) <= set(PRESETS)
    assert PRESETS["impact45"] == DentParams(l=6.10, w=5.48, d=1.24, b=3.11, p=1.01, s_x=-0.11)
