"""Random scenarios, the speed sweep, case studies and the effective-rate bound."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat

import numpy as np

from .core import Region, Scenario, trajectory_speeds, validate_scenario
from .sca import ScaConfig, Solution, lower_bound_solution, rma_solve, slm_solve, two_stage_solve

log = logging.getLogger(__name__)


class GenerationStalled(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    m_count: int = 6
    region: Region = Region.square(4.0)
    d_min: float = 0.5
    v_max: float = 1.0
    n_slots: int = 100
    max_attempts: int = 10_000

    def __post_init__(self):
        disc = self.m_count * math.pi * (self.d_min / 2) ** 2
        if self.m_count < 1:
            raise ValueError("m_count must be at least 1")
        if disc >= self.region.area:
            raise ValueError(f"{self.m_count} discs of diameter {self.d_min} do not fit the region")


def _sample_set(p: GenParams, rng: np.random.Generator) -> np.ndarray:
    lo = np.array(p.region.lo)
    hi = np.array(p.region.hi)
    pts: list[np.ndarray] = []
    for _ in range(p.m_count):
        for _attempt in range(p.max_attempts):
            cand = lo + (hi - lo) * rng.random(2)
            if all(np.hypot(*(cand - q)) >= p.d_min for q in pts):
                pts.append(cand)
                break
        else:
            raise GenerationStalled(f"generation stalled after {p.max_attempts} rejections")
    return np.array(pts)


def generate_scenario(p: GenParams, seed: int) -> Scenario:
    """Uniform points with d_min rejection; initial and destination sets drawn independently."""
    rng = np.random.default_rng(seed)
    initial = _sample_set(p, rng)
    dest = _sample_set(p, rng)
    s = Scenario(initial, dest, p.region, p.d_min, p.v_max, p.n_slots)
    assert validate_scenario(s).ok
    return s


@dataclass(frozen=True)
class SweepRow:
    v_max: float
    scheme: str
    mean_delay: float
    std_delay: float
    trials: int
    failures: int
    mean_gap_to_lb: float


SWEEP_SCHEMES = ("lower_bound", "proposed", "slm", "rma")


def solve_scheme(scheme: str, s: Scenario, cfg: ScaConfig, seed: int = 0) -> Solution:
    if scheme == "proposed":
        return two_stage_solve(s, cfg)
    if scheme == "slm":
        return slm_solve(s, cfg)
    if scheme == "rma":
        return rma_solve(s, cfg, seed)
    if scheme == "lower_bound":
        return lower_bound_solution(s)
    raise ValueError(f"unknown scheme {scheme!r}")


def run_trial(p: GenParams, v_max: float, seed: int, cfg: ScaConfig, schemes=SWEEP_SCHEMES) -> dict:
    """Solve every scheme on one shared scenario; failures are recorded as ``None``."""
    s = generate_scenario(p, seed).with_speed(v_max)
    out: dict[str, Solution | None] = {}
    for scheme in schemes:
        try:
            out[scheme] = solve_scheme(scheme, s, cfg, seed)
        except RuntimeError as exc:  # SubproblemInfeasible / ConstraintAuditError
            log.info("trial seed=%d v=%g %s failed: %s", seed, v_max, scheme, exc)
            out[scheme] = None
    return out


def aggregate(v_max: float, results: list[dict], schemes=SWEEP_SCHEMES) -> list[SweepRow]:
    rows = []
    for scheme in schemes:
        delays = []
        gaps = []
        for res in results:
            sol = res.get(scheme)
            if sol is None:
                continue
            lb = res["lower_bound"].delay if res.get("lower_bound") is not None else None
            delays.append(sol.delay)
            if lb:
                gaps.append((sol.delay - lb) / lb)
        n_ok = len(delays)
        rows.append(SweepRow(
            v_max, scheme,
            float(np.mean(delays)) if delays else math.nan,
            float(np.std(delays)) if delays else math.nan,
            n_ok, len(results) - n_ok,
            float(np.mean(gaps)) if gaps else math.nan,
        ))
    return rows


def sweep_speed(p: GenParams, speeds, trials: int, cfg: ScaConfig | None = None, base_seed: int = 0,
                schemes=SWEEP_SCHEMES, keep: list | None = None, workers: int = 1) -> list[SweepRow]:
    """Mean delay per (speed, scheme); trial ``k`` uses scenario seed ``base_seed + k`` at every speed.

    With ``workers > 1`` trials run in a process pool; results are merged in
    trial order so the output does not depend on the worker count.
    """
    cfg = cfg or ScaConfig()
    speeds = list(speeds)
    if not speeds or trials < 1:
        raise ValueError("need at least one speed and one trial")
    rows: list[SweepRow] = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for v in speeds:
            seeds = [base_seed + k for k in range(trials)]
            if pool is None:
                results = [run_trial(p, v, sd, cfg, schemes) for sd in seeds]
            else:
                results = list(pool.map(run_trial, repeat(p), repeat(v), seeds, repeat(cfg), repeat(schemes)))
            if keep is not None:
                keep.append((v, results))
            rows.extend(aggregate(v, results, schemes))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def effective_rate_bound(tau_1: float, tau_2: float, tau_tot: float, rate_hat: float) -> float:
    """Achievable-rate lower bound after channel estimation and antenna movement overheads."""
    if tau_tot <= 0:
        raise ValueError("block duration must be positive")
    if tau_1 < 0 or tau_2 < 0 or rate_hat < 0:
        raise ValueError("durations and rate must be nonnegative")
    if tau_1 + tau_2 > tau_tot:
        raise ValueError("overheads exceed block")
    return (1.0 - (tau_1 + tau_2) / tau_tot) * rate_hat


@dataclass(frozen=True, eq=False)
class CaseStudy:
    scenario: Scenario
    solutions: dict
    speeds: dict
    ma_labels: tuple[str, ...]
    dest_labels: tuple[str, ...]


def case_study(s: Scenario, cfg: ScaConfig | None = None, rma_seed: int = 0) -> CaseStudy:
    """All three schemes on one instance, with per-MA speed series for plotting."""
    from .core import dest_label, ma_label

    cfg = cfg or ScaConfig()
    sols = {
        "rma": rma_solve(s, cfg, rma_seed),
        "slm": slm_solve(s, cfg),
        "proposed": two_stage_solve(s, cfg),
    }
    speeds = {k: (trajectory_speeds(v.trajectory) if v.trajectory.tau > 0 else np.zeros((s.m_count, s.n_slots)))
              for k, v in sols.items()}
    return CaseStudy(s, sols, speeds,
                     tuple(ma_label(m) for m in range(s.m_count)),
                     tuple(dest_label(j) for j in range(s.m_count)))


def case1_scenario(v_max: float = 1.0) -> Scenario:
    """Six MAs whose optimally associated straight lines never come within d_min."""
    return Scenario(
        [[2.5, 1.1], [0.2, 0.1], [3.3, 3.7], [2.4, 2.9], [2.2, 3.7], [3.3, 0.0]],
        [[3.4, 0.1], [2.9, 0.7], [3.5, 2.2], [1.2, 1.7], [0.1, 0.5], [2.7, 2.6]],
        Region.square(4.0), 0.5, v_max, 100,
    )


def case2_scenario(v_max: float = 1.0) -> Scenario:
    """Six MAs where the bottleneck path crosses others; straight lines force waiting."""
    return Scenario(
        [[1.0, 3.2], [2.9, 0.2], [1.3, 1.0], [2.3, 3.5], [1.2, 3.9], [3.5, 0.6]],
        [[1.9, 1.4], [2.1, 0.6], [0.7, 1.3], [3.7, 2.0], [2.1, 2.0], [2.8, 1.7]],
        Region.square(4.0), 0.5, v_max, 100,
    )
