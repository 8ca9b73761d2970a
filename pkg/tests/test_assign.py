import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from matraj.assign import (Assignment, bottleneck_assignment, brute_force_assignment, distance_matrix,
                           matching_exists, random_assignment)
from matraj.core import Region, Scenario

matrices = st.integers(1, 6).flatmap(
    lambda m: arrays(np.float64, (m, m), elements=st.floats(0, 10, allow_nan=False, width=32)))


def test_distance_matrix_examples():
    sq = Region.square(4)
    assert distance_matrix(Scenario([[0, 0]], [[3, 4]], sq, 0.5, 1, 10)).tolist() == [[5.0]]
    pts = [[0, 0], [1, 1], [3, 2]]
    assert np.all(np.diag(distance_matrix(Scenario(pts, pts, sq, 0.5, 1, 10))) == 0)
    d = distance_matrix(Scenario([[0, 0], [1, 0]], [[0, 1], [1, 1]], sq, 0.5, 1, 10))
    assert np.allclose(d, [[1, np.sqrt(2)], [np.sqrt(2), 1]])


def test_matching_exists_examples():
    d = np.array([[1.0, 2], [2, 3]])
    assert not matching_exists(d, 1.5)
    assert matching_exists(d, 2)


def test_bottleneck_examples():
    a = bottleneck_assignment(np.array([[1.0, 2], [2, 3]]))
    assert a.dest_of == (1, 0) and a.bottleneck == 2
    a = bottleneck_assignment(np.array([[5.0]]))
    assert a.dest_of == (0,) and a.bottleneck == 5
    b = brute_force_assignment(np.array([[1.0, 2], [2, 3]]))
    assert b.dest_of == (1, 0) and b.bottleneck == 2
    assert brute_force_assignment(np.array([[0.7]])).dest_of == (0,)


def test_oracle_size_limit():
    with pytest.raises(ValueError, match="too large"):
        brute_force_assignment(np.zeros((10, 10)))


def test_assignment_rejects_non_permutation():
    with pytest.raises(ValueError):
        Assignment((0, 0), 1.0)


def test_matching_exists_vs_permutations(rng):
    for _ in range(30):
        d = rng.uniform(0, 1, size=(6, 6))
        thr = rng.uniform(0.2, 0.8)
        want = any(all(d[m, p[m]] <= thr for m in range(6)) for p in itertools.permutations(range(6)))
        assert matching_exists(d, thr) == want


def test_against_oracle_200_instances():
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    for k in range(200):
        m = 2 + k % 6
        d = rng.uniform(0, 5, size=(m, m))
        assert bottleneck_assignment(d).bottleneck == brute_force_assignment(d).bottleneck
    assert time.perf_counter() - start < 1.0


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_bottleneck_properties(d):
    a = bottleneck_assignment(d)
    m = len(d)
    assert sorted(a.dest_of) == list(range(m))
    assert a.bottleneck == max(d[i, a.dest_of[i]] for i in range(m))
    assert a.bottleneck in d
    assert a.bottleneck == brute_force_assignment(d).bottleneck
    # optimal threshold is the smallest one admitting a perfect matching
    assert matching_exists(d, a.bottleneck)
    smaller = d[d < a.bottleneck]
    if smaller.size:
        assert not matching_exists(d, smaller.max())


@settings(max_examples=80, deadline=None)
@given(matrices, st.randoms(use_true_random=False), st.floats(0.1, 10))
def test_relabel_and_scale_invariance(d, rnd, scale):
    m = len(d)
    rows = list(range(m))
    cols = list(range(m))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    base = bottleneck_assignment(d).bottleneck
    assert bottleneck_assignment(d[np.ix_(rows, cols)]).bottleneck == base
    assert bottleneck_assignment(d * scale).bottleneck == pytest.approx(base * scale, rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(matrices, st.floats(0, 10))
def test_matching_monotone_in_threshold(d, thr):
    if matching_exists(d, thr):
        assert matching_exists(d, thr + 1.0)


def test_random_assignment_seeded():
    d = np.random.default_rng(3).uniform(size=(6, 6))
    a = random_assignment(d, np.random.default_rng(5))
    b = random_assignment(d, np.random.default_rng(5))
    assert a == b
    assert a.bottleneck >= bottleneck_assignment(d).bottleneck
