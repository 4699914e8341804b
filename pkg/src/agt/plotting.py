"""Figures for solver runs and reports.  Everything renders to files (Agg)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .analysis import BeliefRow, DeceptionReport, VoiReport  # noqa: E402
from .xdo import XdoResult  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "font.size": 9,
}

RED_C = "#c0392b"
BLUE_C = "#2c5aa0"


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def convergence_figure(result: XdoResult, path: str | Path) -> Path:
    """Full-game exploitability of each player and profile value per outer iteration."""
    its = [r.iteration for r in result.log]
    with plt.rc_context(STYLE):
        fig, (ax_gap, ax_val) = plt.subplots(1, 2)
        floor = 1e-6
        ax_gap.semilogy(its, [max(r.gap_r, floor) for r in result.log], "o-", color=RED_C, label="Red")
        ax_gap.semilogy(its, [max(r.gap_b, floor) for r in result.log], "s-", color=BLUE_C, label="Blue")
        ax_gap.set_xlabel("outer iteration")
        ax_gap.set_ylabel(f"exploitability (floored at {floor:g})")
        ax_gap.legend()
        ax_val.plot(its, [r.value for r in result.log], "o-", color="k", label="extended profile")
        ax_val.plot(its, [r.restricted_value for r in result.log], "--", color="0.5", label="restricted game")
        ax_val.set_xlabel("outer iteration")
        ax_val.set_ylabel("expected cost")
        ax_val.legend()
        for ax in (ax_gap, ax_val):
            ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        return _save(fig, path)


def belief_figure(rows: list[BeliefRow], path: str | Path, observer: str = "b") -> Path:
    """Observer's belief in each opponent type against history length, one marker per history."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        key = "blue_belief" if observer == "b" else "red_belief"
        n_types = len(getattr(rows[0], key)) if rows else 0
        for t in range(n_types):
            xs = [len(r.history) for r in rows]
            ys = [getattr(r, key)[t] for r in rows]
            sizes = [10 + 60 * r.probability for r in rows]
            ax.scatter(xs, ys, s=sizes, alpha=0.6, label=f"type {t + 1}")
        ax.set_xlabel("history length")
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_ylabel("belief")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title("Blue's belief about Red" if observer == "b" else "Red's belief about Blue")
        ax.legend()
        return _save(fig, path)


def voi_figure(report: VoiReport, path: str | Path, deltas: DeceptionReport | None = None) -> Path:
    """Bar charts of the four benchmark values and the four VoI ratios."""
    with plt.rc_context(STYLE):
        ncols = 3 if deltas is not None else 2
        fig, axes = plt.subplots(1, ncols, figsize=(3.0 * ncols, 3.2))
        names = ["CI", "1Sr", "1Sb", "2S"]
        axes[0].bar(names, [report.v_ci, report.v_1s_r, report.v_1s_b, report.v_2s], color="0.4")
        axes[0].set_ylabel("game value")
        voi_names = ["1Sr(r)", "1Sb(b)", "2S(r)", "2S(b)"]
        voi = [report.voi_1sr_r, report.voi_1sb_b, report.voi_2s_r, report.voi_2s_b]
        axes[1].bar(voi_names, voi, color=[RED_C, BLUE_C, RED_C, BLUE_C])
        axes[1].set_ylabel("value of information")
        axes[1].axhline(0, color="k", lw=0.6)
        if deltas is not None:
            items = deltas.deltas()
            axes[2].bar(range(len(items)), [d.value for d in items.values()],
                        color=[BLUE_C, BLUE_C, RED_C, RED_C])
            axes[2].set_xticks(range(len(items)), [n.replace("_", " ") for n in items], rotation=30,
                               ha="right")
            axes[2].set_ylabel("cost difference")
            axes[2].axhline(0, color="k", lw=0.6)
        return _save(fig, path)
