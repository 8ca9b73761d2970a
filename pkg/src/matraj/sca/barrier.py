"""Log-barrier interior-point method for the convexified trajectory problem.

Minimizes the per-slot travel radius ``r`` (speed times slot length) over the
free frame coordinates ``z`` subject to

* speed cones ``|x[m, n+1] - x[m, n]| < r``,
* linearized separation rows ``a . z + k > 0``,
* box bounds ``lo < z < hi``.

A phase-I problem with a shared slack finds a strictly feasible start. Newton
systems are banded once variables are ordered slot by slot, with ``r``
eliminated by a bordered solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .feasibility import Frame, LinearCuts


class BarrierFailure(RuntimeError):
    pass


@dataclass(eq=False)
class _Problem:
    nz: int
    bw: int
    var_index: np.ndarray  # (M, N+1, 2)
    x_fixed: np.ndarray
    z_lo: np.ndarray
    z_hi: np.ndarray
    cone_p: np.ndarray  # (K, 2) index of x[m, n+1, d] or -1
    cone_q: np.ndarray  # (K, 2) index of x[m, n, d] or -1
    cone_c: np.ndarray  # (K, 2) constant part of the step
    cut_idx: np.ndarray  # (C, 4)
    cut_coef: np.ndarray  # (C, 4)
    cut_k: np.ndarray  # (C,)

    @property
    def n_constraints(self) -> int:
        return len(self.cone_c) + len(self.cut_k) + 2 * self.nz

    def z_from_x(self, x: np.ndarray) -> np.ndarray:
        mask = self.var_index >= 0
        z = np.empty(self.nz)
        z[self.var_index[mask]] = x[mask]
        return z

    def x_from_z(self, z: np.ndarray) -> np.ndarray:
        x = self.x_fixed.copy()
        mask = self.var_index >= 0
        x[mask] = z[self.var_index[mask]]
        return x


def _setup(x_anchor: np.ndarray, frame: Frame, cuts: LinearCuts) -> _Problem:
    m_count, n1, _ = x_anchor.shape
    var_index = -np.ones((m_count, n1, 2), dtype=np.int64)
    free = (frame.box_hi - frame.box_lo) > 1e-12  # (M, 2)
    nxt = 0
    for n in range(1, n1 - 1):
        for m in range(m_count):
            for d in range(2):
                if free[m, d]:
                    var_index[m, n, d] = nxt
                    nxt += 1
    nz = nxt
    x_fixed = x_anchor.copy()
    z_lo = np.empty(nz)
    z_hi = np.empty(nz)
    for m in range(m_count):
        for d in range(2):
            idx = var_index[m, 1:-1, d]
            if free[m, d]:
                z_lo[idx] = frame.box_lo[m, d]
                z_hi[idx] = frame.box_hi[m, d]

    p = var_index[:, 1:, :].reshape(-1, 2)
    q = var_index[:, :-1, :].reshape(-1, 2)
    xp = x_fixed[:, 1:, :].reshape(-1, 2)
    xq = x_fixed[:, :-1, :].reshape(-1, 2)
    cone_c = np.where(p < 0, xp, 0.0) - np.where(q < 0, xq, 0.0)

    ia = var_index[cuts.im, cuts.slot]  # (C, 2)
    ib = var_index[cuts.ij, cuts.slot]
    cut_idx = np.concatenate([ia, ib], axis=1)
    cut_coef = np.concatenate([cuts.cm, cuts.cj], axis=1)
    xa = x_fixed[cuts.im, cuts.slot]
    xb = x_fixed[cuts.ij, cuts.slot]
    fixed_part = (np.where(ia < 0, xa, 0.0) * cuts.cm).sum(1) + (np.where(ib < 0, xb, 0.0) * cuts.cj).sum(1)
    cut_k = fixed_part - cuts.rhs
    cut_coef = np.where(cut_idx < 0, 0.0, cut_coef)

    bw = 0
    for rows in (np.concatenate([p, q], axis=1), cut_idx):
        if rows.size:
            valid = np.where(rows >= 0, rows, -1)
            hi = valid.max(axis=1)
            lo = np.where(rows >= 0, rows, np.iinfo(np.int64).max).min(axis=1)
            ok = hi >= 0
            if ok.any():
                bw = max(bw, int((hi[ok] - lo[ok]).max()))
    return _Problem(nz, bw, var_index, x_fixed, z_lo, z_hi,
                    np.ascontiguousarray(p), np.ascontiguousarray(q), np.ascontiguousarray(cone_c),
                    np.ascontiguousarray(cut_idx), np.ascontiguousarray(cut_coef), np.ascontiguousarray(cut_k))


@numba.njit(cache=True)
def _barrier_value(z, zeta, t, a_cone, b_cone, a_cut, cone_p, cone_q, cone_c, cut_idx, cut_coef, cut_k, z_lo, z_hi):
    """Barrier objective, or +inf outside the strict interior."""
    f = t * zeta
    rho = a_cone * zeta + b_cone
    if rho <= 0.0:
        return np.inf
    rho2 = rho * rho
    for k in range(cone_c.shape[0]):
        sq = 0.0
        for d in range(2):
            w = cone_c[k, d]
            if cone_p[k, d] >= 0:
                w += z[cone_p[k, d]]
            if cone_q[k, d] >= 0:
                w -= z[cone_q[k, d]]
            sq += w * w
        u = rho2 - sq
        if u <= 0.0:
            return np.inf
        f -= np.log(u)
    for c in range(cut_k.shape[0]):
        s = cut_k[c] + a_cut * zeta
        for e in range(4):
            i = cut_idx[c, e]
            if i >= 0:
                s += cut_coef[c, e] * z[i]
        if s <= 0.0:
            return np.inf
        f -= np.log(s)
    for i in range(z.shape[0]):
        lo = z[i] - z_lo[i]
        hi = z_hi[i] - z[i]
        if lo <= 0.0 or hi <= 0.0:
            return np.inf
        f -= np.log(lo) + np.log(hi)
    return f


@numba.njit(cache=True)
def _add_band(band, i, j, v):
    if i >= j:
        band[i - j, j] += v
    else:
        band[j - i, i] += v


@numba.njit(cache=True)
def _assemble(z, zeta, t, a_cone, b_cone, a_cut, cone_p, cone_q, cone_c, cut_idx, cut_coef, cut_k, z_lo, z_hi, bw):
    nz = z.shape[0]
    g = np.zeros(nz)
    band = np.zeros((bw + 1, nz))
    h = np.zeros(nz)  # cross term d2f/dz dzeta
    g_zeta = t
    h_zeta = 0.0
    rho = a_cone * zeta + b_cone
    rho2 = rho * rho
    idx = np.empty(4, dtype=np.int64)
    sgn = np.empty(4)
    comp = np.empty(4, dtype=np.int64)
    for k in range(cone_c.shape[0]):
        w0 = cone_c[k, 0]
        w1 = cone_c[k, 1]
        cnt = 0
        for d in range(2):
            ip = cone_p[k, d]
            iq = cone_q[k, d]
            if ip >= 0:
                if d == 0:
                    w0 += z[ip]
                else:
                    w1 += z[ip]
                idx[cnt] = ip
                sgn[cnt] = 1.0
                comp[cnt] = d
                cnt += 1
            if iq >= 0:
                if d == 0:
                    w0 -= z[iq]
                else:
                    w1 -= z[iq]
                idx[cnt] = iq
                sgn[cnt] = -1.0
                comp[cnt] = d
                cnt += 1
        u = rho2 - w0 * w0 - w1 * w1
        iu = 1.0 / u
        iu2 = iu * iu
        # phi = -log(rho^2 - |w|^2)
        g_w0 = 2.0 * w0 * iu
        g_w1 = 2.0 * w1 * iu
        g_zeta += -2.0 * a_cone * rho * iu
        h_zeta += a_cone * a_cone * (-2.0 * iu + 4.0 * rho2 * iu2)
        hw00 = 2.0 * iu + 4.0 * w0 * w0 * iu2
        hw11 = 2.0 * iu + 4.0 * w1 * w1 * iu2
        hw01 = 4.0 * w0 * w1 * iu2
        hr0 = -4.0 * a_cone * rho * w0 * iu2
        hr1 = -4.0 * a_cone * rho * w1 * iu2
        for e in range(cnt):
            i = idx[e]
            if comp[e] == 0:
                g[i] += sgn[e] * g_w0
                h[i] += sgn[e] * hr0
            else:
                g[i] += sgn[e] * g_w1
                h[i] += sgn[e] * hr1
            for f in range(e, cnt):
                j = idx[f]
                if comp[e] == 0 and comp[f] == 0:
                    hv = hw00
                elif comp[e] == 1 and comp[f] == 1:
                    hv = hw11
                else:
                    hv = hw01
                v = sgn[e] * sgn[f] * hv
                if f == e:
                    _add_band(band, i, j, v)
                elif i == j:
                    _add_band(band, i, j, 2.0 * v)
                else:
                    _add_band(band, i, j, v)
    for c in range(cut_k.shape[0]):
        s = cut_k[c] + a_cut * zeta
        for e in range(4):
            i = cut_idx[c, e]
            if i >= 0:
                s += cut_coef[c, e] * z[i]
        inv = 1.0 / s
        inv2 = inv * inv
        g_zeta -= a_cut * inv
        h_zeta += a_cut * a_cut * inv2
        for e in range(4):
            i = cut_idx[c, e]
            if i < 0:
                continue
            ce = cut_coef[c, e]
            g[i] -= ce * inv
            h[i] += ce * a_cut * inv2
            for f in range(e, 4):
                j = cut_idx[c, f]
                if j < 0:
                    continue
                v = ce * cut_coef[c, f] * inv2
                if f != e and i == j:
                    v *= 2.0
                _add_band(band, i, j, v)
    for i in range(nz):
        lo = 1.0 / (z[i] - z_lo[i])
        hi = 1.0 / (z_hi[i] - z[i])
        g[i] += -lo + hi
        band[0, i] += lo * lo + hi * hi
    return g, g_zeta, band, h, h_zeta


@dataclass
class BarrierResult:
    x: np.ndarray
    r: float
    gap: float
    newton_steps: int


class _Runner:
    def __init__(self, prob: _Problem):
        self.prob = prob
        self.steps = 0

    def _args(self, a_cone, b_cone, a_cut):
        p = self.prob
        return (a_cone, b_cone, a_cut, p.cone_p, p.cone_q, p.cone_c, p.cut_idx, p.cut_coef, p.cut_k, p.z_lo, p.z_hi)

    def value(self, z, zeta, t, mode):
        return _barrier_value(z, zeta, t, *self._args(*mode))

    def center(self, z, zeta, t, mode, tol=1e-9, max_steps=100, stop=None):
        p = self.prob
        f = self.value(z, zeta, t, mode)
        if not np.isfinite(f):
            raise BarrierFailure("centering started outside the interior")
        for _ in range(max_steps):
            g, g_zeta, band, h, h_zeta = _assemble(z, zeta, t, *self._args(*mode), p.bw)
            self.steps += 1
            rhs = np.column_stack([g, h])
            try:
                sol = solveh_banded(band, rhs, lower=True, check_finite=False)
            except (LinAlgError, ValueError):
                band[0] += 1e-12 * (1.0 + np.abs(band[0]))
                sol = solveh_banded(band, rhs, lower=True, check_finite=False)
            u, v = sol[:, 0], sol[:, 1]
            schur = h_zeta - h @ v
            if schur <= 0:
                schur = max(abs(h_zeta), 1e-300) * 1e-12
            d_zeta = (-g_zeta + h @ u) / schur
            dz = -u - v * d_zeta
            dec = -(g @ dz + g_zeta * d_zeta)
            if dec / 2.0 <= tol:
                break
            step = 1.0
            while True:
                fz = self.value(z + step * dz, zeta + step * d_zeta, t, mode)
                if fz <= f - 0.25 * step * dec:
                    break
                step *= 0.5
                if step < 1e-14:
                    return z, zeta, f
            z = z + step * dz
            zeta = zeta + step * d_zeta
            f = fz
            if stop is not None and stop(zeta):
                break
        return z, zeta, f


def _push_inside(z, lo, hi):
    margin = 1e-7 * (hi - lo)
    return np.clip(z, lo + margin, hi - margin)


def _cone_norms(prob: _Problem, z: np.ndarray) -> np.ndarray:
    zz = np.concatenate([z, [0.0]])
    p = np.where(prob.cone_p >= 0, prob.cone_p, len(z))
    q = np.where(prob.cone_q >= 0, prob.cone_q, len(z))
    w = prob.cone_c + zz[p] - zz[q]
    return np.hypot(w[:, 0], w[:, 1])


def _cut_slacks(prob: _Problem, z: np.ndarray) -> np.ndarray:
    zz = np.concatenate([z, [0.0]])
    idx = np.where(prob.cut_idx >= 0, prob.cut_idx, len(z))
    return prob.cut_k + (prob.cut_coef * zz[idx]).sum(1)


def minimize_radius(x_anchor: np.ndarray, frame: Frame, cuts: LinearCuts, r_lo: float, r_phase1: float,
                    rel_gap: float, mu: float = 10.0) -> BarrierResult:
    """Minimize the common travel radius; raises BarrierFailure when no strict interior exists at ``r_phase1``."""
    prob = _setup(x_anchor, frame, cuts)
    run = _Runner(prob)
    if prob.nz == 0:
        x = prob.x_fixed
        r = float(_cone_norms(prob, np.zeros(0)).max(initial=0.0))
        if len(prob.cut_k) and _cut_slacks(prob, np.zeros(0)).min() < 0:
            raise BarrierFailure("fixed trajectory violates separation rows")
        return BarrierResult(x, r, 0.0, 0)
    z = _push_inside(prob.z_from_x(x_anchor), prob.z_lo, prob.z_hi)
    norms = _cone_norms(prob, z)
    rho = max(r_phase1, float(norms.max()) * (1 + 1e-6) + 1e-12)

    # phase I: push every separation row strictly positive at the fixed radius rho
    if len(prob.cut_k):
        slack = _cut_slacks(prob, z)
        target = 1e-6
        if slack.min() <= target:
            mode = (0.0, rho, 1.0)
            s = max(0.0, -float(slack.min())) + 1e-2
            m1 = len(prob.cone_c) + len(prob.cut_k) + 2 * prob.nz
            t = 1.0
            for _ in range(40):
                z, s, _ = run.center(z, s, t, mode, stop=lambda val: val < -target)
                if s < -target:
                    break
                if s - m1 / t > 0:
                    raise BarrierFailure("no strictly feasible point at this radius")
                if m1 / t < 1e-10:
                    break
                t *= mu
            if s >= 0:
                raise BarrierFailure("no strictly feasible point at this radius")

    # phase II: minimize r from the interior point
    mode = (1.0, 0.0, 0.0)
    r = max(rho, float(_cone_norms(prob, z).max()) * (1 + 1e-6) + 1e-12)
    m2 = prob.n_constraints
    t = m2 / max(r - r_lo, 1e-3 * r_lo)
    goal = rel_gap * r_lo
    while True:
        z, r, _ = run.center(z, r, t, mode)
        if m2 / t <= goal:
            break
        t *= mu
    return BarrierResult(prob.x_from_z(z), float(r), m2 / t, run.steps)
