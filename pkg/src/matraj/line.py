"""Straight-line stage: delay lower bound, constant-speed trajectory, separation check."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assign import Assignment
from .core import EXACT_TOL, FeasibilityReport, Scenario, Trajectory, Violation, pairwise_distances


@dataclass(frozen=True)
class LowerBoundResult:
    delay_lb: float
    slot_len: float
    cutover: tuple[int, ...]


def path_lengths(s: Scenario, a: Assignment) -> np.ndarray:
    dest = s.dest[list(a.dest_of)]
    return np.sqrt(((dest - s.initial) ** 2).sum(-1))


def lower_bound_delay(s: Scenario, a: Assignment) -> LowerBoundResult:
    """Movement delay if every MA drives straight to its destination at full speed."""
    if a.bottleneck <= EXACT_TOL:
        return LowerBoundResult(0.0, 0.0, (0,) * s.m_count)
    n = s.n_slots
    cutover = tuple(
        min(n, math.floor(n * length / a.bottleneck)) for length in path_lengths(s, a)
    )
    return LowerBoundResult(a.bottleneck / s.v_max, a.bottleneck / (s.v_max * n), cutover)


def straight_line_trajectory(s: Scenario, a: Assignment) -> Trajectory:
    """Full-speed motion along each segment, parking at the destination once reached."""
    lb = lower_bound_delay(s, a)
    n = s.n_slots
    dest = s.dest[list(a.dest_of)]
    lengths = path_lengths(s, a)
    pos = np.repeat(s.initial[:, None, :], n + 1, axis=1)
    travelled = s.v_max * lb.slot_len * np.arange(n + 1)
    for m, length in enumerate(lengths):
        if length <= EXACT_TOL:
            continue
        unit = (dest[m] - s.initial[m]) / length
        pos[m] = s.initial[m] + np.minimum(travelled, length)[:, None] * unit
        pos[m, n] = dest[m]
    return Trajectory(pos, lb.slot_len)


def check_inter_ma_distance(t: Trajectory, d_min: float) -> FeasibilityReport:
    """List every (m, j, n) with separation below ``d_min`` (minus a 1e-9 tolerance)."""
    if t.m_count < 2:
        return FeasibilityReport()
    dist = pairwise_distances(t)
    iu, ju = np.triu_indices(t.m_count, k=1)
    flat = dist[:, iu, ju]
    bad_n, bad_p = np.nonzero(flat < d_min - EXACT_TOL)
    return FeasibilityReport(
        tuple(
            Violation(int(iu[p]), int(ju[p]), int(n), float(flat[n, p]))
            for n, p in zip(bad_n, bad_p)
        )
    )
