"""Matplotlib renderings of the analysis figures, saved as SVG files.

Charts are rendered headlessly and deterministically: the SVG hashsalt is
pinned and the creation date stripped, so chart files are bit-identical
across runs of the same configuration.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt

from .protocols import SpaPlane
from .report import write_atomic

_SVG_RC = {"svg.hashsalt": "afmeta", "svg.fonttype": "path"}


def _save(fig, path: str | Path) -> None:
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    write_atomic(path, buffer.getvalue())


def save_spa_plane_svg(plane: SpaPlane, path: str | Path, title: str = "") -> None:
    """Scatter of metric points plus the tradeoff and knowledge lines."""
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(5.5, 5.0))
        for shadows, color in (
            (plane.adequacy_knowledge.shadows, "tab:blue"),
            (plane.fluency_knowledge.shadows, "tab:red"),
        ):
            for shadow in shadows:
                ax.plot([p.x for p in shadow], [p.y for p in shadow], color=color, alpha=0.15, lw=0.8)
        ax.plot(
            [p.x for p in plane.tradeoff.points],
            [p.y for p in plane.tradeoff.points],
            color="black",
            lw=1.8,
            label="tradeoff",
        )
        ax.plot(
            [p.x for p in plane.adequacy_knowledge.points],
            [p.y for p in plane.adequacy_knowledge.points],
            color="tab:blue",
            lw=1.6,
            label="adequacy knowledge",
        )
        ax.plot(
            [p.x for p in plane.fluency_knowledge.points],
            [p.y for p in plane.fluency_knowledge.points],
            color="tab:red",
            lw=1.6,
            label="fluency knowledge",
        )
        markers = "osD^vP*Xd<>"
        for idx, point in enumerate(plane.points):
            ax.scatter([point.x], [point.y], marker=markers[idx % len(markers)], s=45, zorder=5, label=point.label)
        ax.set_xlabel("SPA vs fluency scoring")
        ax.set_ylabel("SPA vs adequacy scoring")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=7, loc="lower left")
        _save(fig, path)


def save_breakdown_svg(
    rows: Sequence[tuple[str, float, float, float, float]],
    path: str | Path,
    title: str = "",
) -> None:
    """Stacked bars of the discordant-pair agreement split per metric.

    Each row is (label, agree_adequacy, agree_fluency, metric_tie_fraction,
    pa_concordant); the concordant-pair PA is annotated next to the bar.
    """
    labels = [r[0] for r in rows]
    agree_a = [r[1] for r in rows]
    agree_f = [r[2] for r in rows]
    ties = [r[3] for r in rows]
    pa_c = [r[4] for r in rows]
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.5, 0.5 * max(4, len(rows)) + 1.2))
        pos = range(len(rows))
        ax.barh(pos, agree_a, color="tab:blue", label="agrees with adequacy")
        ax.barh(pos, agree_f, left=agree_a, color="tab:red", label="agrees with fluency")
        left = [a + f for a, f in zip(agree_a, agree_f)]
        ax.barh(pos, ties, left=left, color="0.7", label="metric tie")
        for y, value in zip(pos, pa_c):
            if value == value:  # skip when no concordant pairs exist
                ax.text(1.01, y, f"PA(conc)={value:.2f}", va="center", fontsize=7)
        ax.set_yticks(list(pos), labels)
        ax.invert_yaxis()
        ax.set_xlim(0, 1.25)
        ax.set_xlabel("share of discordant pairs")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=7, loc="lower right")
        _save(fig, path)
