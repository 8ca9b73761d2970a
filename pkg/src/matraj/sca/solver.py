"""Successive convex refinement of colliding trajectories and the three planning schemes."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..assign import Assignment, bottleneck_assignment, distance_matrix, random_assignment
from ..core import SLACK_TOL, Scenario, Trajectory, trajectory_speeds
from ..line import check_inter_ma_distance, lower_bound_delay, path_lengths, straight_line_trajectory
from .barrier import BarrierFailure, minimize_radius
from .feasibility import FEASIBLE, Frame, LinearCuts, lipschitz_step, max_violation, penalty_descent

log = logging.getLogger(__name__)

SCHEMES = ("proposed", "slm", "rma", "lower_bound")


class SubproblemInfeasible(RuntimeError):
    pass


class ConstraintAuditError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScaConfig:
    epsilon_star: float = 1e-3
    max_outer_iters: int = 50
    tol_feas: float = 1e-6
    bisect_tol: float = 1e-4
    inner_max_iters: int = 20000
    anchor_jitter: float = 1e-3
    tau_cap_factor: float = 20.0
    check_every: int = 25
    stall_checks: int = 16
    stall_ratio: float = 2e-3
    inner: str = "barrier"
    barrier_mu: float = 10.0

    def __post_init__(self):
        for name in ("epsilon_star", "tol_feas", "bisect_tol", "anchor_jitter", "stall_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer_iters", "inner_max_iters", "check_every", "stall_checks"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.inner not in ("barrier", "bisection"):
            raise ValueError(f"unknown inner solver {self.inner!r}")
        if self.tau_cap_factor < 1:
            raise ValueError("tau_cap_factor must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IterationRecord:
    tau2: float
    max_true_violation: float
    bisect_steps: int
    inner_iters: int


@dataclass(frozen=True, eq=False)
class Solution:
    scheme: str
    trajectory: Trajectory
    delay: float
    assignment: Assignment
    objective_trace: tuple[float, ...] = ()
    stage1_feasible: bool = False
    iterations: tuple[IterationRecord, ...] = ()
    seed: int | None = None

    @property
    def n_iters(self) -> int:
        return len(self.objective_trace)


@dataclass(frozen=True, eq=False)
class SubproblemResult:
    trajectory: Trajectory
    tau: float
    bisect_steps: int
    inner_iters: int


def _expansion_directions(delta: np.ndarray, sep: np.ndarray, d_min: float, jitter: float) -> np.ndarray:
    """Unit expansion directions for one pair over all slots.

    Outside conflict windows (anchor separation below ``d_min``) this is the
    anchor offset itself. Inside a window the angle is interpolated between the
    offsets at the window's entry and exit slots, following the side the anchors
    actually pass on, so the rows ask for a smooth detour instead of a flip.
    """
    n1 = len(sep)
    motion = np.zeros_like(delta)
    motion[1:-1] = delta[2:] - delta[:-2]
    perp = np.stack([-motion[:, 1], motion[:, 0]], axis=-1)
    pn = np.hypot(perp[:, 0], perp[:, 1])
    fallback = np.where(pn[:, None] > 0, perp / np.where(pn > 0, pn, 1.0)[:, None], [0.0, 1.0])
    unit = np.where(sep[:, None] >= jitter, delta / np.where(sep > 0, sep, 1.0)[:, None], fallback)
    angle = np.arctan2(unit[:, 1], unit[:, 0])
    conflict = sep < d_min
    conflict[0] = conflict[-1] = False
    n = 1
    while n < n1 - 1:
        if not conflict[n]:
            n += 1
            continue
        a = n
        while n < n1 - 1 and conflict[n]:
            n += 1
        b = n  # first slot after the window
        swept = np.unwrap(angle[a - 1:b + 1])
        frac = (np.arange(a, b) - (a - 1)) / (b - (a - 1))
        theta = swept[0] + frac * (swept[-1] - swept[0])
        unit[a:b] = np.column_stack([np.cos(theta), np.sin(theta)])
    return unit


def build_cuts(anchor: np.ndarray, frame: Frame, d_min: float, jitter: float) -> LinearCuts:
    """Linearized separation rows for every pair and interior slot.

    Each row is the tangent of the squared distance at an expansion pair
    sharing the anchors' midpoint. Where the anchors are at least ``d_min``
    apart the expansion pair is the anchor pair itself; closer anchors are
    spread to separation ``d_min`` (any expansion point gives a valid
    under-estimator, and this one is the least restrictive in its direction).
    Rows are scaled to a unit normal so violations read as lengths.
    """
    m_count, n1, _ = anchor.shape
    if m_count < 2 or d_min <= 0 or n1 < 3:
        return LinearCuts.empty()
    iu, ju = np.triu_indices(m_count, k=1)
    slots = np.arange(1, n1 - 1)
    units = []
    hs = []
    for m, j in zip(iu, ju):
        delta = anchor[m] - anchor[j]
        sep = np.hypot(delta[:, 0], delta[:, 1])
        unit = _expansion_directions(delta, sep, d_min, jitter)
        c = np.maximum(sep, d_min)
        units.append(unit[slots])
        hs.append(((d_min**2 + c**2) / (2.0 * c))[slots])
    u = np.concatenate(units)
    h = np.concatenate(hs)
    im = np.repeat(iu, len(slots)).astype(np.int64)
    ij = np.repeat(ju, len(slots)).astype(np.int64)
    slot = np.tile(slots, len(iu)).astype(np.int64)
    # u . (o_m + B_m x_m - o_j - B_j x_j) >= h
    cm = np.einsum("cab,ca->cb", frame.basis[im], u)
    cj = -np.einsum("cab,ca->cb", frame.basis[ij], u)
    rhs = h - np.einsum("ca,ca->c", u, frame.origin[im] - frame.origin[ij])
    return LinearCuts(im, ij, slot, np.ascontiguousarray(cm), np.ascontiguousarray(cj), np.ascontiguousarray(rhs))


def _run_kernel(x0, frame: Frame, r: float, cuts: LinearCuts, cfg: ScaConfig):
    x, status, iters, worst = penalty_descent(
        np.ascontiguousarray(x0, dtype=float), frame.box_lo, frame.box_hi, float(r),
        cuts.im, cuts.ij, cuts.slot, cuts.cm, cuts.cj, cuts.rhs,
        lipschitz_step(len(x0)), int(cfg.inner_max_iters), float(cfg.tol_feas),
        int(cfg.check_every), int(cfg.stall_checks), float(cfg.stall_ratio),
    )
    return (x if status == FEASIBLE else None), int(iters)


def subproblem_feasible(s: Scenario, cuts: LinearCuts, tau: float, cfg: ScaConfig, warm: Trajectory,
                        frame: Frame | None = None) -> Trajectory | None:
    """Look for a trajectory meeting the convexified constraints at slot length ``tau``.

    Endpoints stay at the warm start's endpoints. Returns ``None`` when no
    point with violation below ``cfg.tol_feas`` was found.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    frame = frame or Frame.free(s.m_count, s.region)
    x0 = frame.to_frame(warm.positions)
    x, _ = _run_kernel(x0, frame, s.v_max * tau, cuts, cfg)
    if x is None:
        return None
    return Trajectory(_world(frame, x, warm.positions), tau)


def _world(frame: Frame, x: np.ndarray, endpoints_from: np.ndarray) -> np.ndarray:
    pos = frame.to_world(x)
    pos[:, 0] = endpoints_from[:, 0]
    pos[:, -1] = endpoints_from[:, -1]
    return pos


def _max_step(x: np.ndarray) -> float:
    step = np.diff(x, axis=1)
    return float(np.sqrt((step**2).sum(-1)).max()) if step.size else 0.0


def solve_subproblem(s: Scenario, a: Assignment, anchor: Trajectory, cfg: ScaConfig,
                     frame: Frame | None = None) -> SubproblemResult:
    """Smallest slot length for the problem convexified at ``anchor``.

    The returned trajectory meets the linearized rows, the speed cones and the
    box exactly at the returned slot length; the slot length is within a
    relative ``cfg.bisect_tol`` of the convexified optimum.
    """
    frame = frame or Frame.free(s.m_count, s.region)
    r_lo = float(path_lengths(s, a).max()) / s.n_slots if s.m_count else 0.0
    if r_lo <= 0:
        return SubproblemResult(Trajectory(anchor.positions, 0.0), 0.0, 0, 0)
    x_anchor = frame.to_frame(anchor.positions)
    cuts = build_cuts(anchor.positions, frame, s.d_min, cfg.anchor_jitter)
    r_anchor = max(_max_step(x_anchor), r_lo)
    anchor_ok = max_violation(x_anchor, r_anchor, cuts) <= cfg.tol_feas
    cap = cfg.tau_cap_factor * r_lo
    if cfg.inner == "barrier":
        r_best, x_best, steps, inner = _barrier_search(x_anchor, frame, cuts, r_lo, r_anchor, anchor_ok, cap, cfg)
    else:
        r_best, x_best, steps, inner = _bisection_search(x_anchor, frame, cuts, r_lo, r_anchor, anchor_ok, cap, cfg)
    if anchor_ok and r_best > r_anchor:
        r_best, x_best = r_anchor, x_anchor
    # report the slot length the positions actually need so speed limits hold exactly
    tau = max(r_best, _max_step(x_best)) / s.v_max
    return SubproblemResult(Trajectory(_world(frame, x_best, anchor.positions), tau), tau, steps, inner)


def _barrier_search(x_anchor, frame, cuts, r_lo, r_anchor, anchor_ok, cap, cfg):
    attempts = [r_anchor * (1 + 1e-3), cap] if anchor_ok else [cap]
    for r_start in attempts:
        try:
            res = minimize_radius(x_anchor, frame, cuts, r_lo, r_start, cfg.bisect_tol, cfg.barrier_mu)
        except BarrierFailure:
            continue
        if max_violation(res.x, res.r, cuts) <= cfg.tol_feas:
            return res.r, res.x, 0, res.newton_steps
    if anchor_ok:
        return r_anchor, x_anchor, 0, 0
    raise SubproblemInfeasible(f"subproblem infeasible up to tau cap (radius {cap:.6g})")


def _bisection_search(x_anchor, frame, cuts, r_lo, r_anchor, anchor_ok, cap, cfg):
    steps = 0
    inner = 0
    r_hi = x_hi = None
    if anchor_ok:
        r_hi, x_hi = r_anchor, x_anchor
    else:
        r = r_lo
        while True:
            x, it = _run_kernel(x_anchor, frame, r, cuts, cfg)
            steps += 1
            inner += it
            if x is not None:
                r_hi, x_hi = r, x
                break
            if r >= cap:
                raise SubproblemInfeasible(f"subproblem infeasible up to tau cap (radius {cap:.6g})")
            r_lo, r = r, min(2.0 * r, cap)
    lo = r_lo
    while r_hi - lo > cfg.bisect_tol * r_hi:
        mid = 0.5 * (lo + r_hi)
        x, it = _run_kernel(x_hi, frame, mid, cuts, cfg)
        steps += 1
        inner += it
        if x is None:
            lo = mid
        else:
            r_hi, x_hi = mid, x
    return r_hi, x_hi, steps, inner


def _true_violation(s: Scenario, t: Trajectory) -> float:
    """Largest shortfall against the true separation, speed and region constraints."""
    worst = 0.0
    rep = check_inter_ma_distance(t, s.d_min)
    if rep.violations:
        worst = max(worst, max(s.d_min - v.distance for v in rep.violations))
    if t.tau > 0:
        over = trajectory_speeds(t).max(initial=0.0) - s.v_max
        worst = max(worst, over * t.tau)
    lo = np.array(s.region.lo)
    hi = np.array(s.region.hi)
    worst = max(worst, float(np.max(lo - t.positions, initial=0.0)), float(np.max(t.positions - hi, initial=0.0)))
    return worst


def sca_refine(s: Scenario, a: Assignment, init: Trajectory, cfg: ScaConfig, scheme: str = "proposed",
               frame: Frame | None = None, seed: int | None = None) -> Solution:
    """Re-solve the convexified problem at each new trajectory until the delay settles."""
    frame = frame or Frame.free(s.m_count, s.region)
    n = s.n_slots
    prev = math.inf
    anchor = init
    trace: list[float] = []
    records: list[IterationRecord] = []
    for _ in range(cfg.max_outer_iters):
        res = solve_subproblem(s, a, anchor, cfg, frame)
        tau2 = n * res.tau
        viol = _true_violation(s, res.trajectory)
        trace.append(tau2)
        records.append(IterationRecord(tau2, viol, res.bisect_steps, res.inner_iters))
        log.debug("%s iter %d: tau2=%.6g ms, bisect=%d, inner=%d", scheme, len(trace), tau2, res.bisect_steps, res.inner_iters)
        eps = abs(prev - tau2)
        anchor = res.trajectory
        prev = tau2
        if eps <= cfg.epsilon_star:
            break
    final = anchor
    viol = _true_violation(s, final)
    if viol > cfg.tol_feas:
        raise ConstraintAuditError(f"final trajectory violates true constraints by {viol:.3g}")
    return Solution(scheme, final, n * final.tau, a, tuple(trace), False, tuple(records), seed)


def _stage_one(s: Scenario, a: Assignment, scheme: str, cfg: ScaConfig, frame_kind: str,
               seed: int | None = None) -> Solution:
    init = straight_line_trajectory(s, a)
    if check_inter_ma_distance(init, s.d_min).feasible:
        lb = lower_bound_delay(s, a)
        return Solution(scheme, init, lb.delay_lb, a, (lb.delay_lb,), True, (), seed)
    if frame_kind == "segments":
        frame = Frame.segments(s.initial, s.dest[list(a.dest_of)])
    else:
        frame = Frame.free(s.m_count, s.region)
    return sca_refine(s, a, init, cfg, scheme, frame, seed)


def two_stage_solve(s: Scenario, cfg: ScaConfig | None = None) -> Solution:
    """Optimal association, straight lines, and refinement only if they collide."""
    cfg = cfg or ScaConfig()
    a = bottleneck_assignment(distance_matrix(s))
    return _stage_one(s, a, "proposed", cfg, "free")


def slm_solve(s: Scenario, cfg: ScaConfig | None = None) -> Solution:
    """Optimal association with every MA held on its straight segment; only speeds adapt."""
    cfg = cfg or ScaConfig()
    a = bottleneck_assignment(distance_matrix(s))
    return _stage_one(s, a, "slm", cfg, "segments")


def rma_solve(s: Scenario, cfg: ScaConfig | None = None, seed: int = 0) -> Solution:
    """Uniformly random association followed by the same refinement as the proposed scheme."""
    cfg = cfg or ScaConfig()
    a = random_assignment(distance_matrix(s), np.random.default_rng(seed))
    return _stage_one(s, a, "rma", cfg, "free", seed)


def lower_bound_solution(s: Scenario) -> Solution:
    a = bottleneck_assignment(distance_matrix(s))
    lb = lower_bound_delay(s, a)
    return Solution("lower_bound", straight_line_trajectory(s, a), lb.delay_lb, a, (lb.delay_lb,),
                    check_inter_ma_distance(straight_line_trajectory(s, a), s.d_min).feasible)
