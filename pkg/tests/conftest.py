import numpy as np
import pytest

from matraj.assign import Assignment, distance_matrix
from matraj.core import Region, Scenario

ACCEPTANCE_LINES: list[str] = []


HEADON_REGION = Region((-1.0, -2.0), (3.0, 2.0))


def headon_scenario(n_slots=100, v_max=1.0):
    # 4x4 region with the swap in its interior; dest listed so that the identity association is the swap
    return Scenario([[0.0, 0.0], [2.0, 0.0]], [[2.0, 0.0], [0.0, 0.0]], HEADON_REGION, 0.5, v_max, n_slots)


def forced(s, dest_of):
    return Assignment.from_permutation(distance_matrix(s), dest_of)


def random_points(rng, m, side=4.0):
    return rng.uniform(0.0, side, size=(m, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tangent_detour(n_slots=100, radius=0.25):
    """Head-on swap where each MA skirts the disc of ``radius`` around the midpoint.

    MA 0 runs (0,0) -> tangent point line -> y=radius -> back down to (2,0);
    MA 1 is its point reflection through (1,0), so the pair distance is twice
    MA 0's distance to (1,0), which never drops below ``radius``.
    Positions are spaced uniformly in arc length; returns (positions, length).
    """
    theta = np.arcsin(radius)
    x1 = radius / np.tan(theta)
    verts = np.array([[0.0, 0.0], [x1, radius], [2.0 - x1, radius], [2.0, 0.0]])
    seg = np.hypot(*np.diff(verts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], n_slots + 1)
    p0 = np.column_stack([np.interp(s, cum, verts[:, 0]), np.interp(s, cum, verts[:, 1])])
    p0[-1] = verts[-1]
    p1 = np.array([2.0, 0.0]) - p0
    return np.stack([p0, p1]), float(cum[-1])
