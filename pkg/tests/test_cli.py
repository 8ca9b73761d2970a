import json
import subprocess
import sys

import pytest

from matraj.cli import run_cli
from matraj.core import validate_scenario
from matraj.serialize import dumps, load_scenario, load_solution, scenario_to_dict

from conftest import headon_scenario


@pytest.fixture
def scen(tmp_path):
    path = tmp_path / "s.json"
    assert run_cli(["gen", "--m", "6", "--dmin", "0.5", "--region", "4x4", "--n", "100", "--seed", "7",
                    "--out", str(path)]) == 0
    return path


def test_gen(scen):
    s = load_scenario(scen)
    assert validate_scenario(s).ok and s.m_count == 6


def test_solve_and_trace(scen, tmp_path, capsys):
    out, trace = tmp_path / "sol.json", tmp_path / "trace.csv"
    assert run_cli(["solve", "--scenario", str(scen), "--scheme", "proposed", "--out", str(out),
                    "--trace", str(trace)]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("scheme=proposed delay_ms=") and "iterations=" in line and "feasible=yes" in line
    lb = tmp_path / "lb.json"
    assert run_cli(["solve", "--scenario", str(scen), "--scheme", "lower_bound", "--out", str(lb)]) == 0
    assert load_solution(out).delay >= load_solution(lb).delay * (1 - 1e-9)
    assert trace.read_text().startswith("iter,tau2_ms,max_true_violation,bisect_steps\n")


def test_missing_file(tmp_path, capsys):
    rc = run_cli(["solve", "--scenario", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x.json")])
    assert rc == 2
    assert "file not found" in capsys.readouterr().err


def test_invalid_inputs(tmp_path, capsys):
    assert run_cli(["gen", "--region", "4by4", "--out", str(tmp_path / "x.json")]) == 2
    assert run_cli(["nonsense"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert run_cli(["solve", "--scenario", str(bad), "--out", str(tmp_path / "o.json")]) == 2
    d = scenario_to_dict(headon_scenario())
    d["initial"][1] = [0.1, 0.0]
    close = tmp_path / "close.json"
    close.write_text(json.dumps(d))
    assert run_cli(["solve", "--scenario", str(close), "--out", str(tmp_path / "o.json")]) == 2
    assert "distance" in capsys.readouterr().err
    assert run_cli(["solve", "--scenario", str(bad), "--out", "o.json", "--set", "nope=1"]) == 2


def test_solver_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "s3.json"
    assert run_cli(["gen", "--seed", "3", "--out", str(path)]) == 0
    # seed 3 has two MAs whose segments block each other
    assert run_cli(["solve", "--scenario", str(path), "--scheme", "slm", "--out", str(tmp_path / "o.json")]) == 3
    assert "solver failure" in capsys.readouterr().err
    rc = run_cli(["gen", "--m", "40", "--dmin", "0.6", "--max-attempts", "3", "--out", str(tmp_path / "g.json")])
    assert rc == 3
    assert "generation stalled" in capsys.readouterr().err


def test_overrides(scen, tmp_path):
    out = tmp_path / "sol.json"
    assert run_cli(["solve", "--scenario", str(scen), "--out", str(out), "--inner", "bisection",
                    "--set", "bisect_tol=1e-3", "--set", "max_outer_iters=5"]) == 0
    cfg = json.loads(out.read_text())["config"]
    assert cfg["inner"] == "bisection" and cfg["bisect_tol"] == 1e-3 and cfg["max_outer_iters"] == 5


def test_bench_deterministic_and_plot(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--trials", "3", "--speeds", "1,2", "--seed", "11"]
    assert run_cli(args + ["--out", str(a)]) == 0
    monkeypatch.setenv("MATRAJ_BENCH_THREADS", "2")
    assert run_cli(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    svg = (tmp_path / "a.svg").read_text()
    assert svg.count('id="series-') == 4
    monkeypatch.setenv("MATRAJ_BENCH_THREADS", "many")
    assert run_cli(args + ["--out", str(b)]) == 2


def test_case_and_plot(tmp_path):
    out = tmp_path / "case"
    assert run_cli(["case", "--which", "2", "--outdir", str(out)]) == 0
    for scheme in ("proposed", "slm", "rma"):
        assert (out / f"traj_{scheme}.svg").exists()
        assert (out / f"speeds_{scheme}.csv").exists()
    sol, sc = out / "proposed.json", out / "scenario.json"
    for kind in ("trajectory", "speeds"):
        assert run_cli(["plot", "--kind", kind, "--input", str(sol), "--scenario", str(sc),
                        "--out", str(tmp_path / f"{kind}.svg")]) == 0
    assert run_cli(["plot", "--kind", "trajectory", "--input", str(sol), "--out", str(tmp_path / "x.svg")]) == 2
    assert run_cli(["plot", "--kind", "sweep", "--input", str(sol), "--out", str(tmp_path / "x.svg")]) == 2


def test_module_entry_point(scen, tmp_path):
    res = subprocess.run([sys.executable, "-m", "matraj", "solve", "--scenario", str(scen), "--scheme", "slm",
                          "--out", str(tmp_path / "o.json")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.startswith("scheme=slm")
