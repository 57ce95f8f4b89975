import math

import numpy as np
import pytest

from framework.errors import DomainError, ResourceLimitError
from models.dent import DentParams, Pose
from services.model_core import EXAMPLE_ROWS
from services.plane import fit_plane_lsq
from services.synthesis import preset, synthesize_cloud


def test_row1_reaches_full_depth():
    cloud = synthesize_cloud(EXAMPLE_ROWS["row1"], spacing=0.5)
    assert cloud.points[:, 2].min() == -5.0
    assert cloud.points[:, 2].max() == 0.0


def test_row5_footprint_matches_length_and_width():
    spacing = 0.5
    cloud = synthesize_cloud(EXAMPLE_ROWS["row5"], spacing=spacing)
    dent = cloud.points[cloud.points[:, 2] < 0.0]
    extent_x = np.ptp(dent[:, 0]) + spacing
    extent_y = np.ptp(dent[:, 1]) + spacing
    assert abs(extent_x - 30.0) <= spacing
    assert abs(extent_y - 15.0) <= spacing


def test_pose_moves_the_deepest_point():
    params = EXAMPLE_ROWS["row6"]
    pose = Pose(c_x=10.0, c_y=-4.0, theta=math.radians(90))
    points = synthesize_cloud(params, pose, spacing=0.5).points
    deepest = points[np.argmin(points[:, 2])]
    # s_x * l = 6 mm along the dent axis, which now points along +y
    assert deepest[0] == pytest.approx(10.0, abs=0.5)
    assert deepest[1] == pytest.approx(2.0, abs=0.5)


def test_same_seed_same_cloud():
    first = synthesize_cloud(EXAMPLE_ROWS["row2"], noise=0.02, seed=3)
    second = synthesize_cloud(EXAMPLE_ROWS["row2"], noise=0.02, seed=3)
    other = synthesize_cloud(EXAMPLE_ROWS["row2"], noise=0.02, seed=4)
    np.testing.assert_array_equal(first.points, second.points)
    assert not np.array_equal(first.points, other.points)


def test_noise_level():
    flat = synthesize_cloud(DentParams(l=2, w=2, d=0.001), spacing=0.5, margin=40.0, noise=0.05, seed=0)
    assert np.std(flat.points[:, 2]) == pytest.approx(0.05, rel=0.05)


def test_tilt_rotates_the_patch():
    cloud = synthesize_cloud(DentParams(l=4, w=4, d=0.01), spacing=0.5, margin=20.0, tilt=10.0)
    normal = fit_plane_lsq(cloud).normal
    assert math.degrees(math.acos(abs(normal[2]))) == pytest.approx(10.0, abs=0.1)


def test_skew_deepens_one_side():
    params = DentParams(l=20, w=20, d=2)
    plain = synthesize_cloud(params, spacing=0.5).points
    skewed = synthesize_cloud(params, spacing=0.5, skew=0.5).points
    right = plain[:, 0] > 0
    assert (skewed[right, 2] <= plain[right, 2]).all()
    assert (skewed[~right, 2] >= plain[~right, 2]).all()
    assert skewed[:, 2].min() < plain[:, 2].min()


def test_secondary_dent_is_added():
    small = preset("impact45")
    cloud = synthesize_cloud(EXAMPLE_ROWS["row1"], spacing=0.25, secondary=[(small, Pose(c_x=40.0, c_y=0.0))])
    near = np.hypot(cloud.points[:, 0] - 40.0, cloud.points[:, 1]) < 3.0
    assert cloud.points[near, 2].min() == pytest.approx(-small.d, rel=0.05)


def test_invalid_arguments():
    with pytest.raises(DomainError):
        synthesize_cloud(EXAMPLE_ROWS["row1"], spacing=0.0)
    with pytest.raises(DomainError):
        synthesize_cloud(EXAMPLE_ROWS["row1"], noise=-0.1)
    with pytest.raises(DomainError):
        synthesize_cloud(EXAMPLE_ROWS["row1"], skew=2.5)
    with pytest.raises(DomainError):
        preset("row9")
    with pytest.raises(ResourceLimitError):
        synthesize_cloud(EXAMPLE_ROWS["row1"], spacing=0.5, cell_cap=100)
