import re
import xml.etree.ElementTree as ET

import numpy as np

from matraj import plots
from matraj.bench import SweepRow, case2_scenario, generate_scenario, GenParams
from matraj.sca import slm_solve, two_stage_solve

NS = "{http://www.w3.org/2000/svg}"


def _group(svg, gid):
    root = ET.fromstring(svg)
    return [g for g in root.iter(f"{NS}g") if g.get("id") == gid]


def _path_points(g):
    # matplotlib writes a polyline as one path: M x y L x y ...
    d = next(g.iter(f"{NS}path")).get("d")
    return len(re.findall(r"[ML]", d))


def test_single_ma_polyline_has_all_points(tmp_path):
    s = generate_scenario(GenParams(m_count=1), 3)
    sol = two_stage_solve(s)
    out = tmp_path / "t.svg"
    svg = plots.plot_trajectories(s, sol, out)
    assert out.read_text() == svg
    (g,) = _group(svg, "traj-a")
    assert _path_points(g) == 101
    assert _group(svg, "region") and _group(svg, "init-a") and _group(svg, "dest-A")


def test_trajectory_labels_and_markers():
    s = case2_scenario()
    svg = plots.plot_trajectories(s, two_stage_solve(s))
    for k in "abcdef":
        assert len(_group(svg, f"traj-{k}")) == 1
        assert len(_group(svg, f"init-{k}")) == 1
        assert f">{k}<" in svg
    for k in "ABCDEF":
        assert len(_group(svg, f"dest-{k}")) == 1
        assert f">{k}<" in svg


def test_speed_plot():
    s = case2_scenario()
    svg = plots.plot_speeds(slm_solve(s), s.v_max)
    assert len(_group(svg, "vmax")) == 1
    for k in "abcdef":
        (g,) = _group(svg, f"speed-{k}")
        assert _path_points(g) == 100


def test_sweep_plot_series():
    rows = [SweepRow(v, sc, 2.0 / v, 0.1, 10, 0, 0.0) for v in np.arange(0.5, 3.01, 0.5)
            for sc in ("lower_bound", "proposed", "slm", "rma")]
    svg = plots.plot_sweep(rows)
    ids = re.findall(r'id="(series-[a-z_]+)"', svg)
    assert sorted(ids) == ["series-lower_bound", "series-proposed", "series-rma", "series-slm"]
    (g,) = _group(svg, "series-slm")
    assert _path_points(g) == 6


def test_svg_deterministic():
    s = case2_scenario()
    sol = two_stage_solve(s)
    assert plots.plot_trajectories(s, sol) == plots.plot_trajectories(s, sol)
