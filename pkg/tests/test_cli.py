import numpy as np
import pytest

from palmpat import (
    DistanceGrid,
    InvalidInputError,
    fit,
    match_counts,
)
from palmpat.cli import main, parse_points_csv, parse_range


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def points_csv(tmp_path):
    rng = np.random.default_rng(31)
    coords = rng.uniform(0, 50, size=(40, 2))
    lines = ["x,y"] + [f"{x},{y}" for x, y in coords]
    return write(tmp_path / "pts.csv", "\n".join(lines) + "\n")


# ---------------------------------------------------------------- parsing helpers


def test_parse_range_inclusive_endpoints():
    assert parse_range("0.3:0.7:0.05") == [0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7]
    assert parse_range("40:80:10") == [40.0, 50.0, 60.0, 70.0, 80.0]
    assert parse_range("0.5") == [0.5]


def test_parse_range_rejects_bad_specs():
    for bad in ("1:2", "a:b:c", "1:0:1", "0:1:0"):
        with pytest.raises(InvalidInputError):
            parse_range(bad)


def test_parse_points_roundtrip(tmp_path):
    path = write(tmp_path / "p.csv", "x,y\n0,0\n3,4\n")
    pattern = parse_points_csv(path)
    assert len(pattern) == 2
    assert pattern.coords.tolist() == [[0.0, 0.0], [3.0, 4.0]]


def test_parse_points_scales_units(tmp_path):
    path = write(tmp_path / "p.csv", "x,y\n0,0\n20,40\n")
    pattern = parse_points_csv(path, units_per_meter=20.0)
    assert pattern.coords.tolist() == [[0.0, 0.0], [1.0, 2.0]]


def test_parse_points_header_only_is_error(tmp_path):
    path = write(tmp_path / "p.csv", "x,y\n")
    with pytest.raises(InvalidInputError):
        parse_points_csv(path)


def test_parse_points_malformed_row_names_line(tmp_path):
    path = write(tmp_path / "p.csv", "x,y\n1,2\noops,3\n")
    with pytest.raises(InvalidInputError, match=":3:"):
        parse_points_csv(path)


def test_parse_points_degenerate_bbox_needs_window(tmp_path):
    path = write(tmp_path / "p.csv", "x,y\n1,1\n1,2\n")
    with pytest.raises(InvalidInputError, match="--window"):
        parse_points_csv(path)


# ---------------------------------------------------------------- exit codes


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_unknown_flag_is_usage_error(points_csv, capsys):
    assert main(["ripley", "--points", points_csv, "--stat", "g", "--bogus"]) == 2
    capsys.readouterr()


def test_missing_file_is_data_error(tmp_path, capsys):
    code = main(["ripley", "--points", str(tmp_path / "absent.csv"), "--stat", "g",
                 "--out-dir", str(tmp_path)])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_malformed_csv_is_data_error(tmp_path, capsys):
    path = write(tmp_path / "bad.csv", "x,y\n1,2\n3\n")
    code = main(["ripley", "--points", path, "--stat", "g", "--out-dir", str(tmp_path)])
    assert code == 3
    assert ":3:" in capsys.readouterr().err


# ---------------------------------------------------------------- subcommands


def test_ripley_curve_schema_and_determinism(points_csv, tmp_path, capsys):
    out = tmp_path / "out"
    argv = ["ripley", "--points", points_csv, "--stat", "g", "--grid-steps", "20",
            "--out-dir", str(out)]
    assert main(argv) == 0
    first = (out / "ripley_g.csv").read_bytes()
    assert main(argv) == 0
    assert (out / "ripley_g.csv").read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0] == "d,value"
    assert len(lines) == 21
    capsys.readouterr()


def test_ripley_j_curve_handles_undefined(points_csv, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["ripley", "--points", points_csv, "--stat", "j", "--grid-steps", "15",
                 "--grid-max", "80", "--n-ref", "200", "--seed", "3",
                 "--out-dir", str(out)]) == 0
    body = (out / "ripley_j.csv").read_text().splitlines()[1:]
    assert any(line.endswith("nan") for line in body)
    capsys.readouterr()


def test_envelope_schema_and_thread_invariance(points_csv, tmp_path, capsys, monkeypatch):
    out = tmp_path / "out"
    argv = ["envelope", "--points", points_csv, "--stat", "g", "--m", "19",
            "--grid-steps", "15", "--seed", "5", "--out-dir", str(out)]
    monkeypatch.setenv("PALMPAT_THREADS", "1")
    assert main(argv) == 0
    single = (out / "envelope_g.csv").read_bytes()
    monkeypatch.setenv("PALMPAT_THREADS", "2")
    assert main(argv) == 0
    assert (out / "envelope_g.csv").read_bytes() == single
    assert single.decode().splitlines()[0] == "d,observed,mean,lo95,hi95,p"
    capsys.readouterr()


def test_simulate_csr_and_reproduction(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "--n", "25", "--window", "0", "0", "40", "40",
                 "--seed", "2", "--out-dir", str(out)]) == 0
    rows = (out / "simulated_points.csv").read_text().splitlines()
    assert rows[0] == "x,y"
    assert len(rows) == 26
    coords = np.array([r.split(",") for r in rows[1:]], dtype=float)
    assert coords.min() >= 0.0 and coords.max() <= 40.0

    assert main(["simulate", "--n", "25", "--window", "0", "0", "40", "40",
                 "--p", "0.9", "--sigma", "1.5", "--seed", "2", "--out-dir", str(out)]) == 0
    capsys.readouterr()


def test_simulate_requires_both_p_and_sigma(tmp_path, capsys):
    code = main(["simulate", "--n", "5", "--window", "0", "0", "1", "1",
                 "--p", "0.5", "--out-dir", str(tmp_path)])
    assert code == 3
    capsys.readouterr()


def test_fit_cli_matches_library(points_csv, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["fit", "--points", points_csv, "--p", "0.2:0.6:0.2",
                 "--sigma", "3:6:3", "--trials", "2", "--grid-steps", "15",
                 "--n-ref", "150", "--seed", "7", "--out-dir", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "p*=" in stdout and "sigma*=" in stdout

    pattern = parse_points_csv(points_csv)
    grid = DistanceGrid.default(pattern.window, 15)
    expected = fit(pattern, [0.2, 0.4, 0.6], [3.0, 6.0], n_trials=2, grid=grid,
                   n_ref=150, seed=7)
    lines = (out / "fit_table.csv").read_text().splitlines()
    assert lines[0] == "p,sigma,d_total,d_1,d_2"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == len(expected.table)
    for row, cell in zip(rows, expected.table):
        assert float(row[0]) == cell.p
        assert float(row[1]) == cell.sigma
        assert float(row[2]) == cell.d_total
        assert tuple(float(v) for v in row[3:]) == cell.d_trials


def test_merge_known_offsets(tmp_path, capsys):
    det = write(
        tmp_path / "det.csv",
        "tile_row,tile_col,x_min,y_min,x_max,y_max,confidence\n"
        "0,0,10,10,30,30,0.9\n"
        "0,1,0,12,20,28,0.8\n"   # tile (0,1) with stride 10 -> overlaps the first box
        "2,2,5,5,15,15,0.7\n",
    )
    out = tmp_path / "out"
    assert main(["merge", "--detections", det, "--patch-size", "40", "--stride", "10",
                 "--iou", "0.3", "--out-dir", str(out)]) == 0
    boxes = (out / "merged_boxes.csv").read_text().splitlines()
    assert boxes[0] == "x_min,y_min,x_max,y_max,confidence"
    # box 2 maps to (10,12,30,28): IoU with box 1 = 320/400 >= 0.3, suppressed
    assert len(boxes) == 3
    centers = (out / "merged_centers.csv").read_text().splitlines()
    assert centers[0] == "x,y"
    assert centers[1] == "20.0,20.0"
    assert centers[2] == "30.0,30.0"
    capsys.readouterr()


def test_merge_global_mode(tmp_path, capsys):
    det = write(tmp_path / "det.csv",
                "x_min,y_min,x_max,y_max,confidence\n0,0,10,10,0.5\n0,0,10,10,0.6\n")
    out = tmp_path / "out"
    assert main(["merge", "--detections", det, "--global", "--out-dir", str(out)]) == 0
    boxes = (out / "merged_boxes.csv").read_text().splitlines()
    assert len(boxes) == 2
    assert boxes[1].endswith("0.6")
    capsys.readouterr()


def test_count_cli_matches_library(tmp_path, capsys):
    detected = write(tmp_path / "d.csv", "x,y\n1,0\n50,50\n")
    labeled = write(tmp_path / "l.csv", "x,y\n0,0\n10,10\n")
    out = tmp_path / "out"
    assert main(["count", "--detected", detected, "--labeled", labeled,
                 "--radius", "5", "--out-dir", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "accuracy=0.5" in stdout
    report = match_counts([(1.0, 0.0), (50.0, 50.0)], [(0.0, 0.0), (10.0, 10.0)], 5.0)
    body = dict(line.split(",") for line in (out / "count_report.csv").read_text().splitlines()[1:])
    assert float(body["accuracy"]) == report.accuracy
    assert float(body["shift_mean"]) == report.shift_mean
    assert int(body["n_matched"]) == len(report.matched)


def test_nn_stats_outputs(points_csv, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["nn-stats", "--points", points_csv, "--k", "3", "--bins", "8",
                 "--out-dir", str(out)]) == 0
    stats = dict(line.split(",") for line in (out / "nn_stats.csv").read_text().splitlines()[1:])
    assert stats["k"] == "3"
    assert float(stats["mean"]) > 0
    hist = (out / "nn_histogram.csv").read_text().splitlines()
    assert hist[0] == "bin_lo,bin_hi,count"
    assert sum(int(row.split(",")[2]) for row in hist[1:]) == 40
    capsys.readouterr()


def test_svg_emitted_on_request(points_csv, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["envelope", "--points", points_csv, "--stat", "g", "--m", "19",
                 "--grid-steps", "12", "--svg", "--out-dir", str(out)]) == 0
    svg = (out / "envelope_g.svg").read_text()
    assert svg.startswith("<svg")
    assert "polyline" in svg
    capsys.readouterr()


def test_default_seed_is_stable_constant(points_csv, tmp_path, capsys):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["ripley", "--points", points_csv, "--stat", "f",
                     "--grid-steps", "10", "--n-ref", "100", "--out-dir", str(out)]) == 0
    assert (out_a / "ripley_f.csv").read_bytes() == (out_b / "ripley_f.csv").read_bytes()
    capsys.readouterr()
