"""JSON/CSV formats for scenarios, solutions, traces and sweeps."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .assign import Assignment
from .core import Point2, Region, Scenario, Trajectory
from .sca import ScaConfig, Solution

UNIT_NOTE = "lengths in wavelengths, time in ms"
TRACE_COLUMNS = ("iter", "tau2_ms", "max_true_violation", "bisect_steps")
SWEEP_COLUMNS = ("v_max", "scheme", "mean_delay_ms", "std_delay_ms", "trials", "failures", "mean_gap_to_lb")


class FormatError(ValueError):
    pass


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _points(arr) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in np.asarray(arr)]


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "m": s.m_count,
        "region": {"lo": list(s.region.lo), "hi": list(s.region.hi)},
        "d_min": s.d_min,
        "v_max": s.v_max,
        "n_slots": s.n_slots,
        "initial": _points(s.initial),
        "dest": _points(s.dest),
        "unit_note": UNIT_NOTE,
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        region = Region(Point2(*d["region"]["lo"]), Point2(*d["region"]["hi"]))
        s = Scenario(d["initial"], d["dest"], region, d["d_min"], d["v_max"], d["n_slots"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed scenario: {exc}") from exc
    if "m" in d and int(d["m"]) != s.m_count:
        raise FormatError(f"scenario says m={d['m']} but lists {s.m_count} initial points")
    return s


def solution_to_dict(sol: Solution, cfg: ScaConfig | None = None) -> dict:
    return {
        "scheme": sol.scheme,
        "delay_ms": sol.delay,
        "tau_ms": sol.trajectory.tau,
        "assignment": list(sol.assignment.dest_of),
        "bottleneck": sol.assignment.bottleneck,
        "stage1_feasible": sol.stage1_feasible,
        "objective_trace": list(sol.objective_trace),
        "positions": [_points(p) for p in sol.trajectory.positions],
        "seed": sol.seed,
        "config": (cfg or ScaConfig()).to_dict(),
    }


def solution_from_dict(d: dict) -> Solution:
    try:
        traj = Trajectory(np.array(d["positions"], dtype=float), d["tau_ms"])
        dest_of = d["assignment"]
        a = Assignment(dest_of, d.get("bottleneck", 0.0))
        return Solution(str(d["scheme"]), traj, float(d["delay_ms"]), a,
                        tuple(float(v) for v in d.get("objective_trace", ())),
                        bool(d.get("stage1_feasible", False)), (), d.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed solution: {exc}") from exc


def dumps(obj: dict) -> str:
    # repr-based float output round-trips exactly
    return json.dumps(obj, indent=1) + "\n"


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_json(path))


def load_solution(path) -> Solution:
    return solution_from_dict(load_json(path))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def trace_csv(sol: Solution) -> str:
    rows = []
    if sol.iterations:
        for k, rec in enumerate(sol.iterations, start=1):
            rows.append([k, repr(rec.tau2), repr(rec.max_true_violation), rec.bisect_steps])
    else:
        rows = [[k, repr(v), repr(0.0), 0] for k, v in enumerate(sol.objective_trace, start=1)]
    return _csv_text(TRACE_COLUMNS, rows)


def sweep_csv(rows) -> str:
    return _csv_text(SWEEP_COLUMNS, [
        [repr(r.v_max), r.scheme, repr(r.mean_delay), repr(r.std_delay), r.trials, r.failures, repr(r.mean_gap_to_lb)]
        for r in rows
    ])


def read_sweep_csv(path):
    from .bench import SweepRow

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SWEEP_COLUMNS:
            raise FormatError(f"{path}: expected columns {','.join(SWEEP_COLUMNS)}")
        try:
            return [SweepRow(float(r["v_max"]), r["scheme"], float(r["mean_delay_ms"]), float(r["std_delay_ms"]),
                             int(r["trials"]), int(r["failures"]), float(r["mean_gap_to_lb"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: malformed row ({exc})") from exc


def speeds_csv(labels, speeds: np.ndarray, tau: float) -> str:
    header = ["slot", "time_ms"] + [f"speed_{lab}" for lab in labels]
    rows = [[n, repr(n * tau)] + [repr(float(v)) for v in speeds[:, n]] for n in range(speeds.shape[1])]
    return _csv_text(header, rows)
