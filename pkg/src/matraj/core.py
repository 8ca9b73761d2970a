"""Domain types and geometric helpers shared across the package.

Units: lengths in wavelengths, times in milliseconds, speeds in
wavelengths per millisecond.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

EXACT_TOL = 1e-9   # exact-endpoint / region clamp tolerance (wavelengths)
SLACK_TOL = 1e-6   # relative slack on speed checks


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle shared by every antenna."""

    lo: Point2
    hi: Point2

    def __post_init__(self):
        object.__setattr__(self, "lo", Point2(float(self.lo[0]), float(self.lo[1])))
        object.__setattr__(self, "hi", Point2(float(self.hi[0]), float(self.hi[1])))

    @classmethod
    def square(cls, side: float) -> "Region":
        return cls(Point2(0.0, 0.0), Point2(side, side))

    @property
    def area(self) -> float:
        return (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y)

    def contains(self, pts, tol: float = EXACT_TOL) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        lo = np.array(self.lo) - tol
        hi = np.array(self.hi) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def clamp(self, pts) -> np.ndarray:
        return np.clip(np.asarray(pts, dtype=float), np.array(self.lo), np.array(self.hi))


def _as_points(pts) -> np.ndarray:
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: np.ndarray
    dest: np.ndarray
    region: Region
    d_min: float
    v_max: float
    n_slots: int

    def __post_init__(self):
        object.__setattr__(self, "initial", _as_points(self.initial))
        object.__setattr__(self, "dest", _as_points(self.dest))
        object.__setattr__(self, "d_min", float(self.d_min))
        object.__setattr__(self, "v_max", float(self.v_max))
        object.__setattr__(self, "n_slots", int(self.n_slots))

    @property
    def m_count(self) -> int:
        return len(self.initial)

    def with_speed(self, v_max: float) -> "Scenario":
        return Scenario(self.initial, self.dest, self.region, self.d_min, v_max, self.n_slots)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            np.array_equal(self.initial, other.initial)
            and np.array_equal(self.dest, other.dest)
            and self.region == other.region
            and (self.d_min, self.v_max, self.n_slots)
            == (other.d_min, other.v_max, other.n_slots)
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Positions indexed ``[m, n]`` for slots ``0..N`` and the slot length ``tau``."""

    positions: np.ndarray
    tau: float

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise ValueError(f"positions must have shape (M, N+1, 2), got {pos.shape}")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "tau", float(self.tau))
        if self.tau < 0:
            raise ValueError("slot length must be nonnegative")

    @property
    def m_count(self) -> int:
        return self.positions.shape[0]

    @property
    def n_slots(self) -> int:
        return self.positions.shape[1] - 1

    @property
    def delay(self) -> float:
        return self.n_slots * self.tau


class Violation(NamedTuple):
    m: int
    j: int
    n: int
    distance: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class ValidationResult:
    problems: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def ma_label(m: int) -> str:
    return string.ascii_lowercase[m] if m < 26 else f"a{m}"


def dest_label(j: int) -> str:
    return string.ascii_uppercase[j] if j < 26 else f"A{j}"


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _close_pairs(pts: np.ndarray, d_min: float):
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    out = []
    for m in range(len(pts)):
        for j in range(m + 1, len(pts)):
            if dist[m, j] < d_min - EXACT_TOL:
                out.append((m, j, float(dist[m, j])))
    return out


def validate_scenario(s: Scenario) -> ValidationResult:
    """Check every scenario invariant and collect all failures."""
    problems: list[str] = []
    lo, hi = s.region.lo, s.region.hi
    if not (np.isfinite([lo.x, lo.y, hi.x, hi.y]).all() and lo.x < hi.x and lo.y < hi.y):
        problems.append(f"degenerate region lo={tuple(lo)} hi={tuple(hi)}")
    m = s.m_count
    if m < 1:
        problems.append("need at least one MA")
    if s.dest.shape != s.initial.shape:
        problems.append(f"initial has {len(s.initial)} points but dest has {len(s.dest)}")
    if s.n_slots < 1:
        problems.append(f"n_slots {s.n_slots} < 1")
    if not np.isfinite(s.v_max) or s.v_max <= 0:
        problems.append(f"nonpositive v_max {_fmt(s.v_max)}")
    if not np.isfinite(s.d_min) or s.d_min < 0:
        problems.append(f"negative d_min {_fmt(s.d_min)}")
    for name, pts in (("initial", s.initial), ("dest", s.dest)):
        if not np.isfinite(pts).all():
            problems.append(f"{name} has non-finite coordinates")
            continue
        inside = s.region.contains(pts)
        for k in np.flatnonzero(~inside):
            problems.append(f"{name} point {k} {tuple(map(float, pts[k]))} outside region")
        if np.isfinite(s.d_min):
            for a, b, dist in _close_pairs(pts, s.d_min):
                problems.append(f"{name} pair ({a},{b}) distance {_fmt(dist)} < {_fmt(s.d_min)}")
    return ValidationResult(tuple(problems))


def trajectory_speeds(t: Trajectory) -> np.ndarray:
    """Per-slot speed ``|p[n+1] - p[n]| / tau`` with shape (M, N)."""
    if t.tau <= 0:
        raise ValueError("zero slot length")
    step = np.diff(t.positions, axis=1)
    return np.sqrt((step**2).sum(-1)) / t.tau


def pairwise_distances(t: Trajectory) -> np.ndarray:
    """Distances with shape (N+1, M, M)."""
    p = t.positions.transpose(1, 0, 2)
    diff = p[:, :, None, :] - p[:, None, :, :]
    return np.sqrt((diff**2).sum(-1))


def min_pairwise_distance(t: Trajectory) -> tuple[float, int, int, int]:
    """Smallest inter-MA distance over all slots as (value, m, j, n).

    Ties go to the smallest (n, m, j).
    """
    if t.m_count < 2:
        raise ValueError("no pairs")
    dist = pairwise_distances(t)
    iu, ju = np.triu_indices(t.m_count, k=1)
    flat = dist[:, iu, ju]  # (N+1, pairs), pairs already in (m, j) order
    k = int(np.argmin(flat))  # row-major argmin gives the first hit in (n, m, j) order
    n, p = divmod(k, flat.shape[1])
    return float(flat[n, p]), int(iu[p]), int(ju[p]), n
