"""SVG figures: trajectory overlays, speed profiles and the delay-versus-speed sweep.

Every data artist carries a gid (``traj-a``, ``init-a``, ``dest-A``,
``speed-a``, ``series-proposed`` ...) so the SVG can be inspected structurally.
"""
from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402
import numpy as np  # noqa: E402

from .core import Scenario, dest_label, ma_label, trajectory_speeds  # noqa: E402
from .sca import Solution  # noqa: E402
from .serialize import write_atomic  # noqa: E402

RC = {
    "path.simplify": False,
    "svg.fonttype": "none",
    "svg.hashsalt": "matraj",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}
SCHEME_STYLE = {
    "lower_bound": dict(marker="o", linestyle="--", label="Lower bound"),
    "proposed": dict(marker="s", linestyle="-", label="Proposed"),
    "slm": dict(marker="^", linestyle="-", label="SLM"),
    "rma": dict(marker="D", linestyle="-", label="RMA"),
}


def _save(fig, path) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = buf.getvalue()
    if path is not None:
        write_atomic(Path(path), text)
    return text


def plot_trajectories(s: Scenario, sol: Solution, path=None, title: str | None = None) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 4.2))
        lo, hi = s.region.lo, s.region.hi
        ax.add_patch(Rectangle(lo, hi.x - lo.x, hi.y - lo.y, fill=False, lw=1.2, color="k", gid="region"))
        pos = sol.trajectory.positions
        for m in range(s.m_count):
            lab = ma_label(m)
            line, = ax.plot(pos[m, :, 0], pos[m, :, 1], lw=1.3)
            line.set_gid(f"traj-{lab}")
            ax.plot(*s.initial[m], "o", color=line.get_color(), ms=5, gid=f"init-{lab}")
            ax.annotate(lab, s.initial[m], xytext=(4, 4), textcoords="offset points")
        for j in range(s.m_count):
            lab = dest_label(j)
            ax.plot(*s.dest[j], "x", color="k", ms=6, gid=f"dest-{lab}")
            ax.annotate(lab, s.dest[j], xytext=(4, -10), textcoords="offset points")
        pad = 0.05 * max(hi.x - lo.x, hi.y - lo.y)
        ax.set_xlim(lo.x - pad, hi.x + pad)
        ax.set_ylim(lo.y - pad, hi.y + pad)
        ax.set_aspect("equal")
        ax.set_xlabel(r"x ($\lambda$)")
        ax.set_ylabel(r"y ($\lambda$)")
        ax.set_title(title or f"{sol.scheme}: delay {sol.delay:.4g} ms")
        fig.tight_layout()
        return _save(fig, path)


def plot_speeds(sol: Solution, v_max: float, path=None, mas=None) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        t = sol.trajectory
        if t.tau > 0:
            speeds = trajectory_speeds(t)
            time = (np.arange(t.n_slots) + 0.5) * t.tau
        else:
            speeds = np.zeros((t.m_count, t.n_slots))
            time = np.arange(t.n_slots, dtype=float)
        for m in (range(t.m_count) if mas is None else mas):
            lab = ma_label(m)
            line, = ax.plot(time, speeds[m], lw=1.2, label=f"MA {lab}")
            line.set_gid(f"speed-{lab}")
        ref = ax.axhline(v_max, color="k", ls=":", lw=1.0, label=r"$V_{max}$")
        ref.set_gid("vmax")
        ax.set_xlabel("time (ms)")
        ax.set_ylabel(r"speed ($\lambda$/ms)")
        ax.set_ylim(0, 1.1 * v_max)
        ax.set_title(f"{sol.scheme}: speeds")
        ax.legend(fontsize=7, ncol=3)
        fig.tight_layout()
        return _save(fig, path)


def plot_sweep(rows, path=None) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.8, 3.4))
        schemes = list(dict.fromkeys(r.scheme for r in rows))
        for scheme in schemes:
            pts = sorted((r.v_max, r.mean_delay) for r in rows if r.scheme == scheme)
            style = SCHEME_STYLE.get(scheme, dict(marker="o", label=scheme))
            line, = ax.plot([p[0] for p in pts], [p[1] for p in pts], ms=4, **style)
            line.set_gid(f"series-{scheme}")
        ax.set_xlabel(r"maximum speed ($\lambda$/ms)")
        ax.set_ylabel("movement delay (ms)")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)
