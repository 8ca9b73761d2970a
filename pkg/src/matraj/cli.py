"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import plots
from .bench import (GenerationStalled, GenParams, SWEEP_SCHEMES, case1_scenario, case2_scenario, case_study,
                    generate_scenario, solve_scheme, sweep_speed)
from .core import Region, validate_scenario
from .line import check_inter_ma_distance
from .sca import ConstraintAuditError, ScaConfig, SubproblemInfeasible
from .serialize import (FormatError, dumps, load_scenario, load_solution, read_sweep_csv,
                        scenario_to_dict, solution_to_dict, speeds_csv, sweep_csv, trace_csv, write_atomic)

THREADS_ENV = "MATRAJ_BENCH_THREADS"
DEFAULT_SPEEDS = "0.5,1.0,1.5,2.0,2.5,3.0"


class InputError(ValueError):
    pass


def parse_region(text: str) -> Region:
    try:
        w, h = (float(v) for v in text.lower().split("x"))
    except ValueError:
        raise InputError(f"bad region {text!r}, expected WxH such as 4x4") from None
    if w <= 0 or h <= 0:
        raise InputError(f"bad region {text!r}, sides must be positive")
    return Region((0.0, 0.0), (w, h))


def parse_floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None
    if not vals:
        raise InputError("empty number list")
    return vals


def build_config(args) -> ScaConfig:
    fields = {f.name: f.type for f in dataclasses.fields(ScaConfig)}
    kw = {}
    if getattr(args, "inner", None):
        kw["inner"] = args.inner
    for item in getattr(args, "set", None) or []:
        name, sep, raw = item.partition("=")
        if not sep or name not in fields:
            raise InputError(f"bad override {item!r}; known fields: {', '.join(fields)}")
        kind = {"float": float, "int": int, "str": str}[fields[name]]
        try:
            kw[name] = kind(float(raw)) if kind is int else kind(raw)
        except ValueError:
            raise InputError(f"bad value for {name}: {raw!r}") from None
    try:
        return ScaConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _checked_scenario(path):
    s = load_scenario(path)
    res = validate_scenario(s)
    if not res.ok:
        raise InputError(f"{path}: invalid scenario: " + "; ".join(res.problems))
    return s


def _summary(sol, s) -> str:
    ok = check_inter_ma_distance(sol.trajectory, s.d_min).feasible
    return (f"scheme={sol.scheme} delay_ms={sol.delay:.6g} iterations={sol.n_iters} "
            f"feasible={'yes' if ok else 'no'} stage1_feasible={'yes' if sol.stage1_feasible else 'no'}")


def cmd_gen(args) -> int:
    try:
        p = GenParams(args.m, parse_region(args.region), args.dmin, args.vmax, args.n, args.max_attempts)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    s = generate_scenario(p, args.seed)
    write_atomic(args.out, dumps(scenario_to_dict(s)))
    print(f"generated m={s.m_count} seed={args.seed} -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    s = _checked_scenario(args.scenario)
    cfg = build_config(args)
    sol = solve_scheme(args.scheme, s, cfg, args.seed)
    write_atomic(args.out, dumps(solution_to_dict(sol, cfg)))
    if args.trace:
        write_atomic(args.trace, trace_csv(sol))
    if args.svg:
        plots.plot_trajectories(s, sol, args.svg)
    print(_summary(sol, s))
    return 0


def bench_workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def cmd_bench(args) -> int:
    try:
        p = GenParams(args.m, parse_region(args.region), args.dmin, 1.0, args.n, args.max_attempts)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    speeds = parse_floats(args.speeds)
    if args.trials < 1 or any(v <= 0 for v in speeds):
        raise InputError("need trials >= 1 and positive speeds")
    rows = sweep_speed(p, speeds, args.trials, build_config(args), args.seed, workers=bench_workers(args))
    write_atomic(args.out, sweep_csv(rows))
    svg = args.plot or str(Path(args.out).with_suffix(".svg"))
    plots.plot_sweep(rows, svg)
    prop = [r for r in rows if r.scheme == "proposed"]
    gap = sum(r.mean_gap_to_lb for r in prop) / len(prop) if prop else float("nan")
    fails = sum(r.failures for r in rows)
    print(f"scheme=sweep rows={len(rows)} trials={args.trials} speeds={len(speeds)} "
          f"proposed_gap_to_lb={gap:.4%} failures={fails} -> {args.out}")
    return 0


def cmd_case(args) -> int:
    if args.scenario:
        s = _checked_scenario(args.scenario)
    else:
        s = (case1_scenario if args.which == 1 else case2_scenario)(args.vmax)
    cfg = build_config(args)
    cs = case_study(s, cfg, args.rma_seed)
    out = Path(args.outdir)
    write_atomic(out / "scenario.json", dumps(scenario_to_dict(s)))
    for scheme, sol in cs.solutions.items():
        write_atomic(out / f"{scheme}.json", dumps(solution_to_dict(sol, cfg)))
        write_atomic(out / f"speeds_{scheme}.csv", speeds_csv(cs.ma_labels, cs.speeds[scheme], sol.trajectory.tau))
        plots.plot_trajectories(s, sol, out / f"traj_{scheme}.svg")
        plots.plot_speeds(sol, s.v_max, out / f"speeds_{scheme}.svg")
        print(_summary(sol, s))
    return 0


def cmd_plot(args) -> int:
    if args.kind == "sweep":
        rows = read_sweep_csv(args.input)
        if not rows:
            raise InputError(f"{args.input}: no rows")
        plots.plot_sweep(rows, args.out)
    else:
        sol = load_solution(args.input)
        if args.kind == "trajectory":
            if not args.scenario:
                raise InputError("trajectory plots need --scenario")
            s = _checked_scenario(args.scenario)
            if sol.trajectory.m_count != s.m_count:
                raise InputError("solution and scenario disagree on the number of MAs")
            plots.plot_trajectories(s, sol, args.out)
        else:
            if args.vmax is not None:
                v = args.vmax
            elif args.scenario:
                v = _checked_scenario(args.scenario).v_max
            else:
                raise InputError("speed plots need --vmax or --scenario")
            plots.plot_speeds(sol, v, args.out)
    print(f"wrote {args.kind} plot -> {args.out}")
    return 0


def _add_solver_opts(sp):
    sp.add_argument("--inner", choices=("barrier", "bisection"), help="inner subproblem solver")
    sp.add_argument("--set", action="append", metavar="FIELD=VALUE", help="override a solver setting (repeatable)")


def _add_gen_opts(sp, m_default=6):
    sp.add_argument("--m", type=int, default=m_default)
    sp.add_argument("--dmin", type=float, default=0.5)
    sp.add_argument("--region", default="4x4")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--max-attempts", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matraj", description="Movable-antenna trajectory planning.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="sample a random scenario")
    _add_gen_opts(sp)
    sp.add_argument("--vmax", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="solve one scenario")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--scheme", choices=SWEEP_SCHEMES, default="proposed")
    sp.add_argument("--out", required=True)
    sp.add_argument("--trace", help="write per-iteration CSV trace")
    sp.add_argument("--svg", help="also render the trajectory figure")
    sp.add_argument("--seed", type=int, default=0, help="association seed for rma")
    _add_solver_opts(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="delay versus maximum speed sweep")
    _add_gen_opts(sp)
    sp.add_argument("--speeds", default=DEFAULT_SPEEDS)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0, help="base seed; trial k uses seed+k")
    sp.add_argument("--out", required=True, help="sweep CSV")
    sp.add_argument("--plot", help="sweep SVG (default: next to the CSV)")
    sp.add_argument("--workers", type=int, help=f"worker processes (default: ${THREADS_ENV} or 1)")
    _add_solver_opts(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("case", help="run all schemes on a case-study layout")
    sp.add_argument("--which", type=int, choices=(1, 2), default=2)
    sp.add_argument("--scenario", help="use this scenario instead of a built-in layout")
    sp.add_argument("--vmax", type=float, default=1.0)
    sp.add_argument("--rma-seed", type=int, default=0)
    sp.add_argument("--outdir", required=True)
    _add_solver_opts(sp)
    sp.set_defaults(func=cmd_case)

    sp = sub.add_parser("plot", help="render an SVG from saved output")
    sp.add_argument("--kind", choices=("trajectory", "speeds", "sweep"), required=True)
    sp.add_argument("--input", required=True, help="solution JSON or sweep CSV")
    sp.add_argument("--scenario")
    sp.add_argument("--vmax", type=float)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plot)
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SubproblemInfeasible, ConstraintAuditError, GenerationStalled) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        msg = str(exc) if str(exc).startswith("file not found") else f"file not found: {exc.filename}"
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except (InputError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
