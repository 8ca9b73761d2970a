import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matraj.bench import (GenerationStalled, GenParams, case1_scenario, case2_scenario, case_study,
                          effective_rate_bound, generate_scenario, sweep_speed)
from matraj.core import Region, validate_scenario


def test_generator_valid_and_deterministic():
    p = GenParams()
    for seed in range(1000):
        assert validate_scenario(generate_scenario(p, seed)).ok
    assert generate_scenario(p, 42) == generate_scenario(p, 42)
    assert generate_scenario(p, 42) != generate_scenario(p, 43)


def test_single_ma_generation():
    s = generate_scenario(GenParams(m_count=1), 0)
    assert s.m_count == 1 and validate_scenario(s).ok


def test_area_heuristic():
    with pytest.raises(ValueError):
        GenParams(m_count=100, region=Region.square(2), d_min=0.5)


def test_generation_stall():
    p = GenParams(m_count=40, region=Region.square(4), d_min=0.6, max_attempts=5)
    with pytest.raises(GenerationStalled, match="generation stalled"):
        generate_scenario(p, 0)


def test_effective_rate_examples():
    assert effective_rate_bound(0, 0, 10, 5) == 5
    assert effective_rate_bound(4, 6, 10, 5) == 0
    assert effective_rate_bound(1, 2, 10, 5) == pytest.approx(3.5)
    with pytest.raises(ValueError, match="overheads exceed block"):
        effective_rate_bound(6, 6, 10, 5)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 10))
def test_effective_rate_monotone(t1, t2a, t2b, rate):
    lo, hi = sorted((t2a, t2b))
    tot = 10.0 + t1
    assert effective_rate_bound(t1, hi, tot + 10, rate) <= effective_rate_bound(t1, lo, tot + 10, rate) + 1e-12


def test_sweep_small():
    rows = sweep_speed(GenParams(), [1.0, 2.0], 3, base_seed=0)
    assert [(r.v_max, r.scheme) for r in rows[:4]] == [(1.0, "lower_bound"), (1.0, "proposed"),
                                                       (1.0, "slm"), (1.0, "rma")]
    by = {(r.v_max, r.scheme): r for r in rows}
    assert by[2.0, "lower_bound"].mean_delay == pytest.approx(by[1.0, "lower_bound"].mean_delay / 2, rel=1e-12)
    for r in rows:
        assert r.trials + r.failures == 3
        assert math.isnan(r.mean_delay) or r.mean_delay >= 0
    assert by[1.0, "proposed"].mean_delay >= by[1.0, "lower_bound"].mean_delay * (1 - 1e-9)


def test_sweep_no_conflict_all_equal():
    # seed 0 has collision-free straight lines
    rows = sweep_speed(GenParams(), [1.0], 1, base_seed=0, schemes=("lower_bound", "proposed", "slm"))
    assert len({r.mean_delay for r in rows}) == 1


def test_sweep_parallel_matches_serial():
    a = sweep_speed(GenParams(n_slots=40), [1.5], 4, base_seed=3)
    b = sweep_speed(GenParams(n_slots=40), [1.5], 4, base_seed=3, workers=2)
    assert a == b


def test_sweep_rejects_empty():
    with pytest.raises(ValueError):
        sweep_speed(GenParams(), [], 1)


def test_case_studies():
    c1 = case_study(case1_scenario())
    assert c1.solutions["proposed"].stage1_feasible
    assert c1.solutions["proposed"].delay == c1.solutions["slm"].delay
    assert c1.solutions["rma"].delay > c1.solutions["proposed"].delay
    assert c1.ma_labels == tuple("abcdef") and c1.dest_labels == tuple("ABCDEF")
    c2 = case_study(case2_scenario())
    assert c2.solutions["proposed"].delay < c2.solutions["slm"].delay
    assert c2.speeds["proposed"].shape == (6, 100)


def test_case_study_single_ma():
    s = generate_scenario(GenParams(m_count=1), 1)
    cs = case_study(s)
    assert len({sol.delay for sol in cs.solutions.values()}) == 1
    assert np.all(np.isfinite(cs.speeds["rma"]))
