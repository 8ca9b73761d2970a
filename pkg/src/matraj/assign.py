"""Min-max (bottleneck) association of initial positions to destinations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Scenario


@dataclass(frozen=True, eq=False)
class Assignment:
    """``dest_of[m]`` is the destination index of MA ``m``; ``bottleneck`` the largest paired distance."""

    dest_of: tuple[int, ...]
    bottleneck: float

    def __post_init__(self):
        object.__setattr__(self, "dest_of", tuple(int(j) for j in self.dest_of))
        if sorted(self.dest_of) != list(range(len(self.dest_of))):
            raise ValueError(f"dest_of {self.dest_of} is not a permutation")
        object.__setattr__(self, "bottleneck", float(self.bottleneck))

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.dest_of == other.dest_of and self.bottleneck == other.bottleneck

    @classmethod
    def from_permutation(cls, d, dest_of) -> "Assignment":
        d = np.asarray(d, dtype=float)
        if len(dest_of) == 0:
            return cls((), 0.0)
        return cls(dest_of, max(d[m, j] for m, j in enumerate(dest_of)))


def distance_matrix(s: Scenario) -> np.ndarray:
    """``d[m, j]`` = distance from initial point m to destination j."""
    diff = s.initial[:, None, :] - s.dest[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def _max_matching(adj: np.ndarray) -> tuple[int, list[int]]:
    # Kuhn's augmenting-path algorithm; match_of_col[j] = row or -1
    n_rows, n_cols = adj.shape
    match_of_col = [-1] * n_cols
    nbrs = [np.flatnonzero(adj[i]).tolist() for i in range(n_rows)]

    def augment(i, seen):
        for j in nbrs[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_of_col[j] < 0 or augment(match_of_col[j], seen):
                match_of_col[j] = i
                return True
        return False

    size = 0
    for i in range(n_rows):
        if augment(i, [False] * n_cols):
            size += 1
    return size, match_of_col


def matching_exists(d, threshold: float) -> bool:
    """True iff edges with ``d[m, j] <= threshold`` admit a perfect matching."""
    d = np.asarray(d, dtype=float)
    size, _ = _max_matching(d <= threshold)
    return size == d.shape[0]


def bottleneck_assignment(d) -> Assignment:
    """Exact min-max assignment by binary search over the sorted distinct distances."""
    d = np.asarray(d, dtype=float)
    m = d.shape[0]
    if d.ndim != 2 or d.shape[1] != m:
        raise ValueError(f"distance matrix must be square, got {d.shape}")
    if m == 0:
        return Assignment((), 0.0)
    cand = np.unique(d)
    lo, hi = 0, len(cand) - 1  # cand[hi] (the max entry) always admits a matching
    while lo < hi:
        mid = (lo + hi) // 2
        if matching_exists(d, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    _, match_of_col = _max_matching(d <= cand[lo])
    dest_of = [0] * m
    for j, i in enumerate(match_of_col):
        dest_of[i] = j
    return Assignment.from_permutation(d, dest_of)


def brute_force_assignment(d) -> Assignment:
    """Enumerate every permutation; ties go to the lexicographically smallest."""
    d = np.asarray(d, dtype=float)
    m = d.shape[0]
    if m > 9:
        raise ValueError("instance too large for oracle")
    best = None
    best_val = np.inf
    for perm in itertools.permutations(range(m)):
        val = max((d[i, j] for i, j in enumerate(perm)), default=0.0)
        if val < best_val:
            best, best_val = perm, val
    return Assignment(best, best_val)


def random_assignment(d, rng: np.random.Generator) -> Assignment:
    d = np.asarray(d, dtype=float)
    return Assignment.from_permutation(d, rng.permutation(d.shape[0]).tolist())
