"""Inner feasibility solver for the convexified trajectory problem at a fixed slot length.

Decision variables live in per-MA frames ``p = origin + basis @ x`` with an
orthonormal basis, so speed cones keep their radius in frame coordinates. A
free MA uses the identity frame with the region as its box; a line-constrained
MA uses ``x = (progress, 0)`` with box ``[0, L] x [0, 0]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..core import Region

FEASIBLE, STALLED, MAX_ITER = 0, 1, 2


@dataclass(frozen=True, eq=False)
class Frame:
    origin: np.ndarray  # (M, 2)
    basis: np.ndarray  # (M, 2, 2), orthonormal columns
    box_lo: np.ndarray  # (M, 2) in frame coordinates
    box_hi: np.ndarray

    @classmethod
    def free(cls, m_count: int, region: Region) -> "Frame":
        lo = np.tile(np.array(region.lo), (m_count, 1))
        hi = np.tile(np.array(region.hi), (m_count, 1))
        return cls(np.zeros((m_count, 2)), np.tile(np.eye(2), (m_count, 1, 1)), lo, hi)

    @classmethod
    def segments(cls, start: np.ndarray, end: np.ndarray) -> "Frame":
        m_count = len(start)
        basis = np.zeros((m_count, 2, 2))
        hi = np.zeros((m_count, 2))
        for m in range(m_count):
            d = end[m] - start[m]
            length = float(np.hypot(*d))
            u = d / length if length > 0 else np.array([1.0, 0.0])
            basis[m] = np.column_stack([u, [-u[1], u[0]]])
            hi[m, 0] = length
        return cls(np.array(start, float), basis, np.zeros((m_count, 2)), hi)

    def to_frame(self, positions: np.ndarray) -> np.ndarray:
        rel = positions - self.origin[:, None, :]
        x = np.einsum("mab,mna->mnb", self.basis, rel)
        return np.clip(x, self.box_lo[:, None, :], self.box_hi[:, None, :])

    def to_world(self, x: np.ndarray) -> np.ndarray:
        return self.origin[:, None, :] + np.einsum("mab,mnb->mna", self.basis, x)


@dataclass(frozen=True, eq=False)
class LinearCuts:
    """Rows ``cm . x[im, slot] + cj . x[ij, slot] >= rhs`` in frame coordinates, unit-normal scaled."""

    im: np.ndarray
    ij: np.ndarray
    slot: np.ndarray
    cm: np.ndarray
    cj: np.ndarray
    rhs: np.ndarray

    @classmethod
    def empty(cls) -> "LinearCuts":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.rhs)


@numba.njit(cache=True)
def _violations(x, r, im, ij, slot, cm, cj, rhs):
    m_count, n1, _ = x.shape
    worst = 0.0
    phi = 0.0
    for m in range(m_count):
        for n in range(n1 - 1):
            dx = x[m, n + 1, 0] - x[m, n, 0]
            dy = x[m, n + 1, 1] - x[m, n, 1]
            v = np.sqrt(dx * dx + dy * dy) - r
            if v > 0.0:
                phi += v * v
                if v > worst:
                    worst = v
    for c in range(rhs.shape[0]):
        a, b, n = im[c], ij[c], slot[c]
        lhs = cm[c, 0] * x[a, n, 0] + cm[c, 1] * x[a, n, 1] + cj[c, 0] * x[b, n, 0] + cj[c, 1] * x[b, n, 1]
        v = rhs[c] - lhs
        if v > 0.0:
            phi += v * v
            if v > worst:
                worst = v
    return worst, phi


@numba.njit(cache=True)
def _gradient(y, r, im, ij, slot, cm, cj, rhs, g):
    m_count, n1, _ = y.shape
    g[:] = 0.0
    for m in range(m_count):
        for n in range(n1 - 1):
            dx = y[m, n + 1, 0] - y[m, n, 0]
            dy = y[m, n + 1, 1] - y[m, n, 1]
            nd = np.sqrt(dx * dx + dy * dy)
            if nd > r:
                k = 2.0 * (nd - r) / nd
                g[m, n + 1, 0] += k * dx
                g[m, n + 1, 1] += k * dy
                g[m, n, 0] -= k * dx
                g[m, n, 1] -= k * dy
    for c in range(rhs.shape[0]):
        a, b, n = im[c], ij[c], slot[c]
        lhs = cm[c, 0] * y[a, n, 0] + cm[c, 1] * y[a, n, 1] + cj[c, 0] * y[b, n, 0] + cj[c, 1] * y[b, n, 1]
        v = rhs[c] - lhs
        if v > 0.0:
            g[a, n, 0] -= 2.0 * v * cm[c, 0]
            g[a, n, 1] -= 2.0 * v * cm[c, 1]
            g[b, n, 0] -= 2.0 * v * cj[c, 0]
            g[b, n, 1] -= 2.0 * v * cj[c, 1]


@numba.njit(cache=True)
def penalty_descent(x0, box_lo, box_hi, r, im, ij, slot, cm, cj, rhs, step, max_iter, tol, check_every, stall_checks, stall_ratio):
    """FISTA with adaptive restart on the squared-hinge penalty; endpoints stay fixed.

    Returns (x, status, iterations, worst_violation).
    """
    m_count, n1, _ = x0.shape
    x = x0.copy()
    x_prev = x0.copy()
    y = x0.copy()
    g = np.zeros_like(x0)
    t = 1.0
    history = np.full(stall_checks + 1, np.inf)
    worst, phi = _violations(x, r, im, ij, slot, cm, cj, rhs)
    if worst <= tol:
        return x, FEASIBLE, 0, worst
    it = 0
    checks = 0
    while it < max_iter:
        it += 1
        _gradient(y, r, im, ij, slot, cm, cj, rhs, g)
        restart = 0.0
        for m in range(m_count):
            for n in range(1, n1 - 1):
                for d in range(2):
                    v = y[m, n, d] - step * g[m, n, d]
                    if v < box_lo[m, d]:
                        v = box_lo[m, d]
                    elif v > box_hi[m, d]:
                        v = box_hi[m, d]
                    x_prev[m, n, d] = x[m, n, d]
                    x[m, n, d] = v
                    restart += (y[m, n, d] - v) * (v - x_prev[m, n, d])
        if restart > 0.0:
            t = 1.0
            beta = 0.0
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / t_next
            t = t_next
        for m in range(m_count):
            for n in range(1, n1 - 1):
                for d in range(2):
                    y[m, n, d] = x[m, n, d] + beta * (x[m, n, d] - x_prev[m, n, d])
        if it % check_every == 0:
            worst, phi = _violations(x, r, im, ij, slot, cm, cj, rhs)
            if worst <= tol:
                return x, FEASIBLE, it, worst
            k = checks % (stall_checks + 1)
            old = history[k]
            history[k] = phi
            checks += 1
            if checks > stall_checks and phi > (1.0 - stall_ratio) * old:
                return x, STALLED, it, worst
    worst, phi = _violations(x, r, im, ij, slot, cm, cj, rhs)
    if worst <= tol:
        return x, FEASIBLE, it, worst
    return x, MAX_ITER, it, worst


def lipschitz_step(m_count: int) -> float:
    # chain Laplacian (<= 4) plus per-slot pair couplings (<= 2(M-1)), doubled for the squared hinge
    return 1.0 / (2.0 * (4.0 + 2.0 * max(m_count - 1, 0)))


def max_violation(x: np.ndarray, r: float, cuts: LinearCuts) -> float:
    worst, _ = _violations(np.ascontiguousarray(x), r, cuts.im, cuts.ij, cuts.slot, cuts.cm, cuts.cj, cuts.rhs)
    return float(worst)
