import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from lt_analyzer.cli import main

GOLDEN = Path(__file__).parent / "golden"
K3 = ["--weights", "1:0.5,2:0.5", "--k", "3", "--n", "3"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_finite_golden(capsys, tmp_path):
    table = tmp_path / "q.csv"
    code, out, _ = run(capsys, "finite", *K3, "--engine", "naive", "--csv", str(table))
    assert code == 0
    assert out == (GOLDEN / "k3_finite.json").read_text()
    got = list(csv.reader(table.open()))
    want = list(csv.reader((GOLDEN / "k3_qtable.csv").open()))
    assert got[0] == want[0] == ["u", "r", "Q"]
    for g, w in zip(got[1:], want[1:], strict=True):
        assert g[:2] == w[:2] and float(g[2]) == pytest.approx(float(w[2]), abs=1e-15)


def test_finite_poly(capsys):
    code, out, _ = run(capsys, "finite", *K3, "--engine", "poly")
    assert code == 0 and abs(json.loads(out)["p_error"] - 0.40625) <= 1e-6


def test_finite_bad_k(capsys):
    code, _, err = run(capsys, "finite", "--weights", "1:1", "--k", "0", "--n", "3")
    assert code == 2 and err


def test_n_and_delta_exclusive(capsys):
    code, _, _ = run(capsys, "finite", *K3, "--delta", "0.1")
    assert code == 2


def test_gen_dist(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-dist", "ideal", "--k", "4")
    assert code == 0 and out == (GOLDEN / "ideal_k4.json").read_text()
    weights = [w["p"] for w in json.loads(out)["weights"]]
    assert weights == pytest.approx([0.25, 0.5, 1 / 6, 1 / 12], abs=1e-16)
    target = tmp_path / "r.json"
    code, _, _ = run(capsys, "gen-dist", "robust", "--k", "100", "--c", "0.1", "--delta-rs", "0.5", "--out", str(target))
    assert code == 0
    assert abs(sum(w["p"] for w in json.loads(target.read_text())["weights"]) - 1) < 1e-12


def test_gen_dist_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"k": null, "weights": [{"d": 1, "p": 0.6}, {"d": 2, "p": 0.5}]}')
    code, _, err = run(capsys, "gen-dist", "file", "--in", str(bad))
    assert code == 2 and "SumNotOne" in err
    code, _, _ = run(capsys, "gen-dist", "file", "--in", str(tmp_path / "missing.json"))
    assert code == 2


def test_asymptotic(capsys, tmp_path):
    curve = tmp_path / "c.csv"
    code, out, _ = run(capsys, "asymptotic", "--weights", "1:0.1,2:0.9", "--delta", "0", "--csv", str(curve))
    res = json.loads(out)
    assert code == 0 and res["hypotheses_hold"] and abs(res["z_star"] - 0.7782521618891) < 1e-9
    assert curve.read_text().startswith("t,F,ripple_fraction\n")
    code, out, _ = run(capsys, "asymptotic", "--weights", "2:1", "--delta", "0")
    res = json.loads(out)
    assert code == 0 and not res["hypotheses_hold"] and res["boundary_note"]
    code, _, err = run(capsys, "asymptotic", "--weights", "1:0.5,2:0.5", "--delta", "1")
    assert code == 2 and "DegreeOneSaturated" in err


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--dist", "ideal", "--k", "100", "--n", "110")
    res = json.loads(out)
    assert code == 0 and res["consistent"] and 0 <= res["lower"] <= res["upper"] <= 1
    code, _, _ = run(capsys, "bounds", *K3, "--n1", "4")
    assert code == 2


def test_simulate_golden(capsys, tmp_path):
    hist, traj = tmp_path / "h.csv", tmp_path / "t.csv"
    code, out, _ = run(capsys, "simulate", *K3, "--trials", "500", "--seed", "2024", "--jobs", "1",
                       "--csv", str(hist), "--trajectory-csv", str(traj))
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / "k3_simulate.json").read_text())
    assert hist.read_text().startswith("bin_lo,bin_hi,count\n")
    assert traj.read_text().startswith("u,mean_X_u\n3,")


def test_simulate_unseeded_prints_seed(capsys):
    code, out, err = run(capsys, "simulate", *K3, "--trials", "5", "--jobs", "1")
    seed = json.loads(out)["seed"]
    assert code == 0 and f"seed: {seed}" in err


def test_simulate_jobs_env(capsys, monkeypatch):
    monkeypatch.setenv("LT_ANALYZER_JOBS", "2")
    code, out, _ = run(capsys, "simulate", *K3, "--trials", "20", "--seed", "1")
    assert code == 0 and json.loads(out)["trials"] == 20


def test_dist_source_required(capsys):
    code, _, err = run(capsys, "finite", "--k", "3", "--n", "3")
    assert code == 2 and "exactly one" in err
    code, _, _ = run(capsys, "finite", "--k", "3", "--n", "3", "--weights", "1:x")
    assert code == 2


def test_precision_loss_exit_code(capsys):
    code, _, err = run(capsys, "finite", "--dist", "ideal", "--k", "200", "--n", "220",
                       "--engine", "poly", "--precision-bits", "12")
    assert code == 1 and "PrecisionLoss" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lt_analyzer", "finite", *K3],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["p_error"] == 0.40625
