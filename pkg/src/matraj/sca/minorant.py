"""Affine under-estimator of the squared inter-MA distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AffineMinorant:
    """``value(p_m, p_j) = offset + grad_m . p_m + grad_j . p_j``.

    Built from the first-order expansion of ``|p_m - p_j|^2`` at an anchor pair,
    which never exceeds the true squared distance because the squared norm is convex.
    """

    grad_m: np.ndarray
    grad_j: np.ndarray
    offset: float
    slot: int = -1
    pair: tuple[int, int] = (-1, -1)

    @property
    def delta(self) -> np.ndarray:
        """Anchor separation ``p_m - p_j`` (after any jitter)."""
        return self.grad_m / 2.0

    def value(self, p_m, p_j) -> float:
        return float(self.offset + self.grad_m @ np.asarray(p_m) + self.grad_j @ np.asarray(p_j))


def linearize_distance_sq(
    anchor_m,
    anchor_j,
    jitter: float = 1e-3,
    direction=None,
    slot: int = -1,
    pair: tuple[int, int] = (-1, -1),
) -> AffineMinorant:
    """Tangent of ``|p_m - p_j|^2`` at the anchors.

    Anchors closer than ``jitter`` are first pushed apart symmetrically to
    separation ``jitter``: along their own offset when it is nonzero, otherwise
    along ``direction`` (default: +y). Coincident anchors would give a constant
    minorant that no trajectory can lift above ``d_min^2``.
    """
    a_m = np.asarray(anchor_m, dtype=float)
    a_j = np.asarray(anchor_j, dtype=float)
    delta = a_m - a_j
    norm = float(np.hypot(*delta))
    if norm < jitter:
        if norm > 0:
            unit = delta / norm
        else:
            unit = np.array([0.0, 1.0]) if direction is None else np.asarray(direction, float)
            unit = unit / np.hypot(*unit)
        delta = jitter * unit
    sq = float(delta @ delta)
    # -|D|^2 + 2 D.(p_m - p_j) with D the anchor separation
    return AffineMinorant(2.0 * delta, -2.0 * delta, -sq, slot, pair)
