import csv
import json
import math
import subprocess
import sys

import pytest

from mcshoot.cli import main
from mcshoot.config import ConfigError, RunConfig, parse_config, validate


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_eig_rows(tmp_path):
    assert main(["eig", "--k", "3", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "eigenvalues.csv")
    assert [int(r["k"]) for r in rows] == [1, 2, 3]
    for r, exact in zip(rows, (0.0, math.pi**2, 4 * math.pi**2)):
        assert float(r["lambda_k"]) == pytest.approx(exact, abs=1e-8 * max(1.0, exact))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["exit_code"] == 0 and manifest["config"]["mode"] == "eig"
    assert {"mcshoot", "numpy", "scipy", "python"} <= set(manifest["versions"])


def test_rotation_and_solve(tmp_path):
    assert main(["rotation", "--lam", "1", "--p", "3", "--d", "0.5", "--out", str(tmp_path / "r")]) == 0
    (row,) = _rows(tmp_path / "r" / "rotation.csv")
    assert 0 < float(row["rotation"]) < 1
    assert (tmp_path / "r" / "trajectory.csv").exists()
    assert main(["solve-approx", "--k", "1", "--out", str(tmp_path / "s")]) == 0
    report = json.loads((tmp_path / "s" / "solutions.json").read_text())
    assert len(report["solutions"]) == 2
    assert sorted(p.name for p in (tmp_path / "s").glob("solution_*.csv")) == [
        "solution_above_j1.csv", "solution_below_j1.csv"]


def test_phase_and_check(tmp_path):
    assert main(["phase", "--lam", "1", "--p", "3", "--levels", "0.1", "0.2", "--out", str(tmp_path / "p")]) == 0
    rep = json.loads((tmp_path / "p" / "phase.json").read_text())
    assert rep["homoclinic_exists"] and rep["components"] == [1, 1]
    assert rep["period"]["value"] == pytest.approx(2 * math.pi / math.sqrt(2), rel=1e-3)
    assert main(["check", "--lam", "1", "--p", "3", "--out", str(tmp_path / "c")]) == 0
    crit = json.loads((tmp_path / "c" / "criteria.json").read_text())
    assert crit["criteria"]["eta"] == pytest.approx(0.75)


def test_hypothesis_failure_exit(tmp_path):
    # f'(u0) = 2 < lambda_2 = pi^2: no half-turn near u0
    assert main(["limit", "--lam", "1", "--p", "3", "--ladder", "2", "4", "--out", str(tmp_path)]) == 3
    rep = json.loads((tmp_path / "hypothesis.json").read_text())
    assert rep["hypothesis_holds"] is False and rep["fprime_u0"] == pytest.approx(2.0)


@pytest.mark.parametrize("argv", [
    ["check", "--p", "0.5"],
    ["limit", "--ladder", "8", "4"],
    ["rotation", "--tol", "1e-20", "--d", "0.5"],
    ["rotation"],
])
def test_config_errors_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mode": "eig", "colour": "red"}))
    with pytest.raises(ConfigError):
        parse_config(cfg)
    assert main(["eig", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_config_round_trip():
    cfg = validate(RunConfig())
    again = parse_config(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_outputs_deterministic(tmp_path):
    def run(sub, threads):
        out = tmp_path / sub
        cmd = [sys.executable, "-m", "mcshoot.cli", "solve-approx", "--k", "1", "--n", "8", "--out", str(out)]
        subprocess.run(cmd, check=True, env={"MCSHOOT_THREADS": threads, "PATH": ""})
        return {p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"}

    a, b = run("a", "1"), run("b", "4")
    assert a.keys() == b.keys() and a == b
