import json

import numpy as np
import pytest

from services.cloud_io import read_cloud

FAST = ("--mode", "simplified3", "--multistart", 2, "--max-evals", 4000)


def _flat_cloud(path):
    xs = np.arange(0.0, 30.0, 0.5)
    X, Y = np.meshgrid(xs, xs)
    np.savetxt(path, np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)]))
    return path


@pytest.mark.integration
def test_synth_row1_reaches_full_depth(tmp_path, dentfit):
    out = tmp_path / "row1.xyz"
    assert dentfit("synth", out, "--preset", "row1") == 0
    assert read_cloud(out).points[:, 2].min() == pytest.approx(-5.0, abs=1e-9)
    assert out.read_text().startswith("# dentfit synth")


@pytest.mark.integration
def test_synth_is_byte_identical_per_seed(tmp_path, dentfit):
    first, second = tmp_path / "a.xyz", tmp_path / "b.xyz"
    for path in (first, second):
        assert dentfit("synth", path, "--preset", "row8", "--noise", 0.02, "--seed", 9) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.integration
def test_fit_of_a_flat_cloud_finds_no_dent(tmp_path, dentfit):
    flat = _flat_cloud(tmp_path / "flat.xyz")
    out = tmp_path / "reports.json"
    assert dentfit("fit", flat, "--out", out) == 2
    assert not out.exists()

    assert dentfit("fit", flat, "--out", out, "--allow-empty") == 2
    assert out.read_text() == "[]\n"


@pytest.mark.integration
def test_fit_reports_one_dent(tmp_path, dentfit, small_dent):
    out = tmp_path / "reports.json"
    assert dentfit("fit", small_dent, "--out", out, *FAST) == 0

    reports = json.loads(out.read_text())
    assert len(reports) == 1
    report = reports[0]
    assert sorted(report) == ["convergence", "flags", "metrics", "mode", "params", "pose", "srm"]
    assert report["mode"] == "simplified3"
    assert sorted([report["params"]["l"], report["params"]["w"]]) == pytest.approx([8.0, 12.0], rel=0.02)
    assert report["params"]["d"] == pytest.approx(1.0, rel=0.02)
    assert report["metrics"]["mae"] < 0.01


@pytest.mark.integration
def test_fit_output_is_deterministic(tmp_path, dentfit, small_dent):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert dentfit("fit", small_dent, "--out", first, *FAST) == 0
    assert dentfit("fit", small_dent, "--out", second, *FAST, "--workers", 2) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.integration
def test_compare_ratio_is_at_least_one(tmp_path, dentfit, small_dent):
    out = tmp_path / "compare.json"
    assert dentfit("compare", small_dent, "--out", out, "--multistart", 1, "--max-evals", 3000) == 0
    (report,) = json.loads(out.read_text())
    assert report["simplified3"]["mode"] == "simplified3"
    assert report["full7"]["mode"] == "full7"
    assert report["mae_ratio"] >= 1.0


@pytest.mark.integration
def test_srm_of_a_fit_report(tmp_path, dentfit, small_dent):
    reports, measures = tmp_path / "reports.json", tmp_path / "srm.json"
    assert dentfit("fit", small_dent, "--out", reports, *FAST) == 0
    assert dentfit("srm", reports, "--out", measures) == 0
    (srm,) = json.loads(measures.read_text())
    assert srm["length"] == pytest.approx(12.0, rel=0.05)
    assert srm["width"] == pytest.approx(8.0, rel=0.05)
    assert srm["max_depth"] == pytest.approx(1.0, rel=0.02)


@pytest.mark.integration
def test_srm_of_an_egg_shaped_grid_shows_a_discrepancy(tmp_path, dentfit):
    grid, measures = tmp_path / "row8.hf", tmp_path / "srm.json"
    assert dentfit("synth", tmp_path / "row8.xyz", "--preset", "row8", "--hf", grid) == 0
    assert dentfit("srm", grid, "--out", measures) == 0
    (srm,) = json.loads(measures.read_text())
    assert srm["discrepancy"] > 0.0
    assert srm["max_depth"] == pytest.approx(5.0, rel=0.01)


@pytest.mark.integration
def test_srm_of_a_cloud(tmp_path, dentfit, small_dent):
    measures = tmp_path / "srm.json"
    assert dentfit("srm", small_dent, "--out", measures) == 0
    (srm,) = json.loads(measures.read_text())
    # only points deeper than the threshold are measured, so the box is smaller than l x w
    assert 9.0 < srm["length"] < 12.5
    assert srm["width"] < srm["length"]
    assert srm["max_depth"] == pytest.approx(1.0, abs=0.01)


@pytest.mark.integration
def test_render_of_a_grid(tmp_path, dentfit):
    grid, image = tmp_path / "row1.hf", tmp_path / "row1.ppm"
    assert dentfit("synth", tmp_path / "row1.xyz", "--hf", grid, "--spacing", 1.0) == 0
    assert dentfit("render", grid, "--out", image, "--scale", 5.0) == 0
    assert image.read_bytes().startswith(b"P6")


@pytest.mark.integration
def test_missing_input_fails_without_output(tmp_path, dentfit, capsys):
    out = tmp_path / "reports.json"
    assert dentfit("fit", tmp_path / "missing.xyz", "--out", out) == 1
    assert not out.exists()
    assert "dentfit fit: error" in capsys.readouterr().err


@pytest.mark.integration
def test_unsupported_format_fails(tmp_path, dentfit):
    scan = tmp_path / "scan.las"
    scan.write_bytes(b"LASF")
    assert dentfit("fit", scan) == 1


@pytest.mark.integration
def test_usage_errors_exit_with_one(dentfit):
    with pytest.raises(SystemExit) as excinfo:
        dentfit("fit", "scan.xyz", "--cell", "-1")
    assert excinfo.value.code == 1


@pytest.mark.integration
def test_two_dents_with_heatmaps(tmp_path, dentfit):
    cloud, out, heatmap = tmp_path / "two.xyz", tmp_path / "reports.json", tmp_path / "residual.ppm"
    assert dentfit(
        "synth", cloud, "--preset", "row5", "--l", 12, "--w", 8, "--d", 1,
        "--second", "impact45", "--second-at", 30, 0,
    ) == 0
    assert dentfit("fit", cloud, "--out", out, "--heatmap", heatmap, "--min-points", 20, *FAST) == 0

    reports = json.loads(out.read_text())
    assert len(reports) == 2
    sizes = [max(r["params"]["l"], r["params"]["w"]) for r in reports]
    assert sizes[0] == pytest.approx(12.0, rel=0.05)
    assert sizes[1] < 8.0
    for k in range(2):
        assert (tmp_path / f"residual-{k}.ppm").read_bytes().startswith(b"P6")
