import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matraj.assign import bottleneck_assignment, distance_matrix
from matraj.bench import GenParams, generate_scenario
from matraj.core import Region, Scenario, Trajectory, trajectory_speeds
from matraj.line import check_inter_ma_distance, lower_bound_delay, path_lengths, straight_line_trajectory

from conftest import forced, headon_scenario

SQ = Region.square(4)


def _solve_lb(s):
    a = bottleneck_assignment(distance_matrix(s))
    return a, lower_bound_delay(s, a)


def test_lower_bound_examples():
    s = Scenario([[0, 0]], [[3, 4]], Region.square(6), 0.5, 1.0, 100)
    assert _solve_lb(s)[1].delay_lb == 5.0
    s = Scenario([[0, 0]], [[2, 0]], SQ, 0.5, 2.0, 100)
    lb = _solve_lb(s)[1]
    assert lb.delay_lb == 1.0 and lb.slot_len == pytest.approx(0.01)
    s = Scenario([[0, 0], [0, 2]], [[2, 0], [1, 2]], SQ, 0.5, 1.0, 100)
    assert _solve_lb(s)[1].cutover == (100, 50)


def test_straight_line_uniform():
    s = Scenario([[0, 0]], [[1, 0]], SQ, 0.5, 1.0, 100)
    t = straight_line_trajectory(s, _solve_lb(s)[0])
    assert t.tau == pytest.approx(0.01)
    assert np.allclose(t.positions[0, :, 0], np.arange(101) / 100)
    assert np.all(t.positions[0, :, 1] == 0)


def test_straight_line_parked_ma():
    s = Scenario([[1, 1], [3, 3]], [[1, 1], [3, 1]], SQ, 0.5, 1.0, 100)
    t = straight_line_trajectory(s, _solve_lb(s)[0])
    assert np.all(t.positions[0] == [1, 1])


def test_straight_line_full_speed_and_endpoints():
    s = Scenario([[0, 0], [2, 2]], [[2, 0], [0, 2]], SQ, 0.5, 1.0, 100)
    a, lb = _solve_lb(s)
    t = straight_line_trajectory(s, a)
    steps = np.hypot(*np.diff(t.positions, axis=1).transpose(2, 0, 1))
    assert np.allclose(steps, s.v_max * lb.slot_len, rtol=1e-12)
    assert np.array_equal(t.positions[:, -1], s.dest[list(a.dest_of)])


def test_zero_bottleneck():
    s = Scenario([[1, 1]], [[1, 1]], SQ, 0.5, 1.0, 10)
    a, lb = _solve_lb(s)
    assert lb.delay_lb == 0 and lb.slot_len == 0
    assert straight_line_trajectory(s, a).tau == 0


def test_check_parallel_lines_feasible():
    y = np.linspace(0, 3, 11)
    pos = np.stack([np.stack([0 * y, y], -1), np.stack([0 * y + 1, y], -1)])
    assert check_inter_ma_distance(Trajectory(pos, 0.1), 0.5).feasible


def test_check_headon_collision_at_midpoint():
    s = headon_scenario()
    t = straight_line_trajectory(s, forced(s, [0, 1]))
    rep = check_inter_ma_distance(t, 0.5)
    assert not rep.feasible
    hit = [v for v in rep.violations if v.n == 50]
    assert hit and hit[0].distance == pytest.approx(0.0, abs=1e-12)
    assert all(v.distance < 0.5 for v in rep.violations)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_check_matches_rescan(seed):
    s = generate_scenario(GenParams(n_slots=30), seed)
    t = straight_line_trajectory(s, _solve_lb(s)[0])
    want = []
    for n in range(31):
        for m in range(6):
            for j in range(m + 1, 6):
                d = float(np.hypot(*(t.positions[m, n] - t.positions[j, n])))
                if d < s.d_min - 1e-9:
                    want.append((m, j, n))
    got = [(v.m, v.j, v.n) for v in check_inter_ma_distance(t, s.d_min).violations]
    assert sorted(got) == sorted(want)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_lower_bound_scaling(seed, v):
    s = generate_scenario(GenParams(), seed)
    a, lb1 = _solve_lb(s)
    lb2 = lower_bound_delay(s.with_speed(v), a)
    assert lb2.delay_lb == pytest.approx(lb1.delay_lb / v, rel=1e-12)
    assert lb1.slot_len == pytest.approx(lb1.delay_lb / s.n_slots, rel=1e-12)
    assert all(0 <= c <= s.n_slots for c in lb1.cutover)
    t = straight_line_trajectory(s, a)
    assert trajectory_speeds(t).max() <= s.v_max * (1 + 1e-9)
    assert path_lengths(s, a).max() == a.bottleneck
