import json

import numpy as np
import pytest

from framework.errors import DomainError
from models.dent import DentParams, Pose
from models.fit import FULL7, SIMPLIFIED3, FitConfig
from services.cloud_io import read_cloud
from services.fitting import fit, objective
from services.model_core import EXAMPLE_ROWS, IMPACTS
from services.pipeline import compare_segments, extract_segments, fit_segments
from services.segmentation import anchor_ring, segment_dents
from services.synthesis import synthesize_cloud

DEPTH_THRESHOLD = 0.05
RECOVERY = FitConfig(mode=FULL7, multistart=3)
# at this skew and noise the simplified fit stays well above the noise floor
IMPACT_SKEW = 0.3
IMPACT_NOISE = 0.002


def _fit_cloud(cloud, config):
    extraction = extract_segments(cloud, DEPTH_THRESHOLD, cell=2.0, min_points=50)
    (_, report), *_ = fit_segments(extraction, config, DEPTH_THRESHOLD)
    return report


@pytest.mark.integration
@pytest.mark.parametrize("row", ["row1", "row2", "row5", "row8"])
def test_full_fit_recovers_example_rows(row):
    truth = EXAMPLE_ROWS[row]
    report = _fit_cloud(synthesize_cloud(truth, spacing=1.0), RECOVERY)
    params = report.params
    for name in ("l", "w", "d"):
        assert getattr(params, name) == pytest.approx(getattr(truth, name), rel=0.01)
    for name in ("p", "s_x", "s_y"):
        assert getattr(params, name) == pytest.approx(getattr(truth, name), abs=0.02)
    assert params.b == pytest.approx(truth.b, rel=0.05)


@pytest.mark.integration
def test_full_fit_of_a_noisy_egg_reaches_the_noise_level():
    cloud = synthesize_cloud(EXAMPLE_ROWS["row8"], spacing=1.0, noise=0.02, seed=8)
    assert _fit_cloud(cloud, RECOVERY).mae <= 0.03


@pytest.mark.integration
@pytest.mark.parametrize("seed", range(10))
def test_skewed_impact_favors_the_full_fit(seed):
    cloud = synthesize_cloud(IMPACTS["impact45"], skew=IMPACT_SKEW, noise=IMPACT_NOISE, seed=seed)
    extraction = extract_segments(cloud, DEPTH_THRESHOLD, cell=2.0, min_points=50)
    (_, report), *_ = compare_segments(extraction, FitConfig(), DEPTH_THRESHOLD)
    assert report.mae_ratio >= 5.0


@pytest.mark.integration
def test_anchor_ring_pins_the_length():
    truth = EXAMPLE_ROWS["row5"]
    noisy = synthesize_cloud(truth, spacing=0.5, noise=0.02, seed=5).points
    segment = segment_dents(noisy, depth_threshold=DEPTH_THRESHOLD)[0]
    ringed = anchor_ring(segment, noisy, width=4.0, depth_threshold=DEPTH_THRESHOLD)
    report = fit(ringed, FitConfig(mode=SIMPLIFIED3, multistart=2))
    assert report.params.l == pytest.approx(truth.l, rel=0.01)

    # only the ring sees the flat border that a longer dent would sink
    exact = synthesize_cloud(truth, spacing=0.5).points
    bare = segment_dents(exact, depth_threshold=DEPTH_THRESHOLD)[0]
    ringed = anchor_ring(bare, exact, width=4.0, depth_threshold=DEPTH_THRESHOLD)
    longer = truth.model_copy(update={"l": 1.3 * truth.l})
    growth = objective(ringed, longer, Pose()) - objective(ringed, truth, Pose())
    bare_growth = objective(bare, longer, Pose()) - objective(bare, truth, Pose())
    assert growth > bare_growth


@pytest.mark.integration
def test_least_squares_plane_and_inlier_tolerance_are_selectable():
    cloud = synthesize_cloud(DentParams(l=12, w=8, d=1), tilt=5.0)
    robust = extract_segments(cloud, DEPTH_THRESHOLD, cell=2.0, min_points=50, inlier_tol=0.01)
    plain = extract_segments(cloud, DEPTH_THRESHOLD, cell=2.0, min_points=50, plane="lsq")
    assert len(robust.segments) == len(plain.segments) == 1
    # the dent pulls the least-squares plane down, never the robust one
    assert plain.local[:, 2].max() > robust.local[:, 2].max()
    with pytest.raises(DomainError):
        extract_segments(cloud, DEPTH_THRESHOLD, cell=2.0, min_points=50, plane="median")


@pytest.mark.integration
def test_shallow_wide_dent_end_to_end(tmp_path, dentfit):
    cloud, out, segments = tmp_path / "wide.xyz", tmp_path / "reports.json", tmp_path / "segment.xyz"
    assert dentfit(
        "synth", cloud, "--l", 60, "--w", 53, "--d", 0.8, "--s-x", -0.1, "--s-y", 0.05,
        "--noise", 0.025, "--margin", 10, "--spacing", 1.0,
    ) == 0
    # six sigma keeps the noise from seeding segments
    assert dentfit(
        "fit", cloud, "--out", out, "--multistart", 2, "--depth-threshold", 0.15, "--segments-out", segments,
    ) == 0

    (report,) = json.loads(out.read_text())
    assert report["metrics"]["mae"] <= 0.03
    assert report["convergence"]["converged"] is True
    assert len(read_cloud(segments)) == report["metrics"]["n_points"]


@pytest.mark.integration
def test_plane_flags_reach_the_pipeline(tmp_path, dentfit, small_dent):
    out = tmp_path / "reports.json"
    segments = tmp_path / "segment.xyz"
    assert dentfit(
        "fit", small_dent, "--out", out, "--plane", "lsq", "--segments-out", segments,
        "--mode", "simplified3", "--multistart", 1, "--max-evals", 3000,
    ) == 0
    assert segments.read_text().startswith("# dentfit segment 0")
    assert dentfit("srm", small_dent, "--out", out, "--inlier-tol", 0.02) == 0

    with pytest.raises(SystemExit):
        dentfit("fit", small_dent, "--plane", "median")


@pytest.mark.integration
def test_far_stray_point_does_not_stop_the_fit(tmp_path, dentfit, small_dent):
    points = np.vstack([read_cloud(small_dent).points, [[2.0e6, 2.0e6, 0.0]]])
    stray = tmp_path / "stray.xyz"
    np.savetxt(stray, points)
    out = tmp_path / "reports.json"
    assert dentfit("fit", stray, "--out", out, "--mode", "simplified3", "--multistart", 1) == 0
    assert len(json.loads(out.read_text())) == 1
