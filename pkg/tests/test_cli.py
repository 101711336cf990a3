import csv
import math

import numpy as np
import pytest

from layerbem.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_cases_listing(capsys):
    assert main(["cases"]) == 0
    out = capsys.readouterr().out
    assert "8 cases" in out
    lines = [ln for ln in out.splitlines() if ln.startswith("case")]
    assert len(lines) == 8
    case1 = next(ln for ln in lines if ln.startswith("case1 "))
    assert "(9)" in case1
    case5a = next(ln for ln in lines if ln.startswith("case5a"))
    assert "(0.0625, 9)" in case5a


def test_solve_outputs_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["solve", "--case", "case1", "--M", "84", "--out", str(out),
            "--field-n", "24"]
    assert main(args) == 0
    rows = read_csv(out / "boundary.csv")
    assert len(rows) == 1
    assert float(rows[0]["boundary_error"]) <= 1e-6
    assert float(rows[0]["boundary_error_abs"]) > 0.0
    assert (out / "traces.csv").exists()
    assert (out / "field.png").exists()
    manifest = (out / "solve_manifest.txt").read_text()
    assert "command=solve" in manifest
    assert "field.csv" in manifest

    # byte-identical rerun: the pipeline is deterministic
    before = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    assert main(args) == 0
    after = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    assert before == after


def test_solve_field_matches_plane_wave_for_transparent_medium(tmp_path):
    out = tmp_path / "beta1"
    assert main(["solve", "--k", "2", "2", "--r", "4", "--M", "64",
                 "--out", str(out), "--field-n", "16"]) == 0
    for row in read_csv(out / "field.csv"):
        r, theta = float(row["r"]), float(row["theta"])
        u = complex(float(row["re_u"]), float(row["im_u"]))
        plane = np.exp(2j * r * math.sin(theta))
        if abs(r - 4.0) > 1.0:  # close-evaluation ring is unreliable
            assert abs(u - plane) < 1e-6


def test_solve_four_layer_case(tmp_path, capsys):
    out = tmp_path / "case7"
    assert main(["solve", "--case", "case7", "--M", "48", "24", "12",
                 "--out", str(out), "--field-n", "12"]) == 0
    rows = read_csv(out / "boundary.csv")
    assert [r["interface"] for r in rows] == ["0", "1", "2"]


def test_radial_sweep(tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["radial-sweep", "--case", "case1", "--M", "144",
                 "--per-layer", "15", "--out", str(out)]) == 0
    rows = read_csv(out / "radial.csv")
    assert len(rows) == 30
    skipped = [r for r in rows if r["skipped"] == "True"]
    kept = [r for r in rows if r["skipped"] == "False"]
    assert skipped and kept
    assert max(float(r["error"]) for r in kept) < 1e-11
    assert (out / "radial.png").exists()


def test_optimize_schema(tmp_path, capsys):
    out = tmp_path / "opt"
    assert main(["optimize", "--case", "case1", "--sound-hard",
                 "--out", str(out)]) == 0
    rows = read_csv(out / "optimal.csv")
    assert list(rows[0]) == ["case", "interface", "M_tar", "error", "N_ppw"]
    assert abs(int(rows[0]["M_tar"]) - 46) <= 4
    trace = read_csv(out / "search_trace.csv")
    assert int(trace[0]["M_0"]) == 16
    assert (out / "search.png").exists()


def test_adapt_csv_schedule(tmp_path, capsys):
    out = tmp_path / "adapt"
    assert main(["adapt", "--case", "case1", "--variant", "ana",
                 "--n0", "400", "--iterations", "4", "--out", str(out),
                 "--dump-metric"]) == 0
    rows = read_csv(out / "adapt.csv")
    assert [float(r["complexity"]) for r in rows] == [400, 400, 520, 520]
    eps = [float(r["E_p"]) for r in rows]
    assert eps[2] < eps[0]
    assert (out / "adapt.png").exists()
    metric = read_csv(out / "metric.csv")
    assert {"x", "y", "layer", "Txx", "Txy", "Tyy"} <= set(metric[0])


def test_adapt_star_geometry(tmp_path, capsys):
    out = tmp_path / "star"
    assert main(["adapt", "--case", "case1", "--star-a", "0.05",
                 "--star-n", "10", "--iterations", "2", "--n0", "200",
                 "--out", str(out)]) == 0
    rows = read_csv(out / "adapt.csv")
    assert len(rows) == 2
    assert all(np.isfinite(float(r["E_p"])) for r in rows)


def test_bad_arguments_exit_code(capsys):
    assert main(["solve", "--case", "nosuchcase"]) == 1
    with pytest.raises(SystemExit):
        main(["radial-sweep", "--case", "case1", "--star-a", "0.1",
              "--star-n", "8"])
