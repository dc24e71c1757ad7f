import csv
import json
import shutil
import subprocess

import pytest

from twinphoton.cli import main


@pytest.fixture
def run_cfg(tmp_path):
    p = tmp_path / "run.txt"
    p.write_text("pair_rate = 2e5\neta1 = 0.3\neta2 = 0.3\ngate_s = 0.005\nn_gates = 3\n"
                 "dead_time_ns = 50\ntrue_transmittance = 0.7\n")
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_pm_curve(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["pm-curve", "--from-nm", "700", "--to-nm", "950", "--steps", "11", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["lambda_s_nm", "lambda_i_nm", "theta_s_deg", "theta_i_deg", "residual"]
    assert len(rows) == 11 and all(abs(float(r["residual"])) < 1e-10 for r in rows)


def test_pm_curve_no_phase_matching(tmp_path):
    code = main(["pm-curve", "--psi", "10", "--from-nm", "700", "--to-nm", "950",
                 "--steps", "5", "--out", str(tmp_path / "c.csv")])
    assert code == 3


def test_pm_curve_domain_error(tmp_path):
    code = main(["pm-curve", "--from-nm", "300", "--to-nm", "950", "--out", str(tmp_path / "c.csv")])
    assert code == 2


def test_simulate_count_g2(tmp_path, run_cfg):
    ts = tmp_path / "ts.csv"
    assert main(["simulate", "--config", str(run_cfg), "--seed", "4", "--out", str(ts)]) == 0
    counts = tmp_path / "counts.csv"
    assert main(["count", "--timestamps", str(ts), "--gate-s", "0.005", "--out", str(counts)]) == 0
    rows = read_csv(counts)
    assert [r["gate"] for r in rows] == ["0", "1", "2", "mean"]
    assert all(int(r["Ncc"]) <= min(int(r["N1"]), int(r["N2"])) for r in rows[:3])
    g2 = tmp_path / "g2.csv"
    assert main(["g2", "--timestamps", str(ts), "--bin-ns", "2", "--range-ns", "22",
                 "--gate-s", "0.005", "--out", str(g2)]) == 0
    vals = [float(r["g2"]) for r in read_csv(g2)]
    assert len(vals) == 11 and vals[5] == max(vals) and vals[5] > 10


def test_g2_bad_range(tmp_path, run_cfg):
    ts = tmp_path / "ts.csv"
    main(["simulate", "--config", str(run_cfg), "--out", str(ts)])
    assert main(["g2", "--timestamps", str(ts), "--bin-ns", "2", "--range-ns", "3",
                 "--gate-s", "0.005"]) == 2


def test_estimate_from_counts(tmp_path, run_cfg):
    files = {}
    for stream, name in ((0, "ref"), (1, "sam")):
        ts = tmp_path / f"{name}_ts.csv"
        main(["simulate", "--config", str(run_cfg), "--stream", str(stream), "--out", str(ts)])
        files[name] = tmp_path / f"{name}.csv"
        main(["count", "--timestamps", str(ts), "--gate-s", "0.005", "--out", str(files[name])])
    corr = tmp_path / "corr.txt"
    corr.write_text("dark1 = 351\ndark2 = 483\ntau_dead_ns = 50\ntau_cc_ns = 7.1\ngate_s = 0.005\n")
    out = tmp_path / "rep.json"
    assert main(["estimate", "--sample", str(files["sam"]), "--reference", str(files["ref"]),
                 "--corrections", str(corr), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["valid"] and abs(rep["Tcc"] - 70) < 5 * rep["dTcc"] + 1


def test_estimate_paper_table(tmp_path):
    out = tmp_path / "t.json"
    assert main(["estimate", "--paper-table", "1", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert round(rows[1]["Tcc"], 2) == 84.24


def test_estimate_missing_inputs():
    assert main(["estimate"]) == 2


def test_fit_and_concentration(tmp_path, capsys):
    data = tmp_path / "pts.csv"
    data.write_text(
        "concentration_ng_ul,transmittance_pct,dT_pct\n"
        "100,85.38,0.10\n10,86.34,0.05\n1,87.04,0.05\n0.1,87.86,0.05\n0.01,88.55,0.05\n"
    )
    model = tmp_path / "model.json"
    assert main(["fit", "--data", str(data), "--out", str(model)]) == 0
    blob = json.loads(model.read_text())
    assert set(blob["parameters"]) == {"T0", "C0", "Tinf", "Cinf"} and blob["converged"]
    assert main(["concentration", "--model", str(model), "--t", "87.0", "--dt", "0.01"]) == 0
    assert "ng/ul" in capsys.readouterr().out
    assert main(["concentration", "--model", str(model), "--t", "150"]) == 2


def test_fit_too_few_points(tmp_path):
    data = tmp_path / "pts.csv"
    data.write_text("concentration_ng_ul,transmittance_pct,dT_pct\n1,80,1\n2,70,1\n")
    assert main(["fit", "--data", str(data)]) == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_reproduce_table(tmp_path, fmt):
    out = tmp_path / f"t.{fmt}"
    assert main(["reproduce-table", "3", "--format", fmt, "--out", str(out)]) == 0
    if fmt == "csv":
        rows = read_csv(out)
        assert rows[1]["Tcc"] == "93.60" and rows[1]["Tcc_printed"] == "93.61"
    else:
        assert json.loads(out.read_text())["table"] == 3


def test_run(tmp_path, run_cfg):
    out = tmp_path / "out"
    assert main(["run", "--config", str(run_cfg), "--level", "counts", "--out-dir", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "sample_gates.csv").exists()


def test_missing_file():
    assert main(["fit", "--data", "/nonexistent/file.csv"]) == 2


@pytest.mark.skipif(shutil.which("twinphoton") is None, reason="entry point not installed")
def test_console_script():
    r = subprocess.run(["twinphoton", "pm-curve", "--from-nm", "810", "--to-nm", "810", "--steps", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("lambda_s_nm")
