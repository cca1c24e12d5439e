"""Figure rendering for reports.

Everything draws on the Agg backend and writes PNGs with the software
metadata stripped, so identical inputs give identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "standard",
}

SET_COLOR = "#c0392b"
IDLE_COLOR = "#2e86c1"


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def render_graph(g, path, highlight: Sequence[int] = (), title: str | None = None,
                 show_radius: bool = False) -> Path:
    """Draw ``g`` at its coordinates (a circle layout when it has none), members of ``highlight`` in red."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if g.coords is not None:
            xy = np.asarray(g.coords, dtype=float).reshape(-1, 2)
        else:
            ang = 2 * np.pi * np.arange(g.n) / max(g.n, 1)
            xy = np.column_stack([np.cos(ang), np.sin(ang)])
        for i, j in g.edges:
            ax.plot(xy[[i, j], 0], xy[[i, j], 1], color="0.6", lw=0.8, zorder=1)
        hs = set(highlight)
        colors = [SET_COLOR if v in hs else IDLE_COLOR for v in range(g.n)]
        if g.n:
            ax.scatter(xy[:, 0], xy[:, 1], c=colors, s=60, zorder=2, edgecolors="k", linewidths=0.5)
        if show_radius and g.radius is not None:
            for v in hs:
                ax.add_patch(plt.Circle(xy[v], g.radius / 2, fill=False, ls=":", color=SET_COLOR))
        for v in range(g.n):
            ax.annotate(str(v), xy[v], xytext=(4, 4), textcoords="offset points", fontsize=7)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xticks([])
        ax.set_yticks([])
        if title:
            ax.set_title(title)
        return _save(fig, path)


def render_bars(labels: Sequence, values: Sequence[float], path, xlabel: str = "",
                ylabel: str = "", title: str | None = None, errors: Sequence[float] | None = None,
                highlight: Sequence[int] = ()) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(values))
        hs = set(highlight)
        ax.bar(x, values, yerr=errors, color=[SET_COLOR if i in hs else IDLE_COLOR for i in x],
               capsize=2)
        ax.set_xticks(x)
        ax.set_xticklabels([str(s) for s in labels], rotation=90 if len(labels) > 12 else 0)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def render_heatmap(matrix, path, labels: Sequence | None = None, title: str | None = None,
                   vmin: float = -1.0, vmax: float = 1.0) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        im = ax.imshow(np.asarray(matrix), cmap="RdBu_r", vmin=vmin, vmax=vmax)
        fig.colorbar(im, ax=ax, shrink=0.8)
        if labels is not None:
            ax.set_xticks(range(len(labels)))
            ax.set_yticks(range(len(labels)))
            ax.set_xticklabels(labels, rotation=90)
            ax.set_yticklabels(labels)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def render_lines(series: Mapping[str, tuple[Sequence[float], Sequence[float]]], path,
                 xlabel: str = "", ylabel: str = "", title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, (x, y) in series.items():
            ax.plot(x, y, label=name)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def render_histogram(hist: Mapping[str, int], path, top: int = 20, good: Sequence[str] = (),
                     title: str | None = None) -> Path:
    """Most frequent measured bitstrings; optimal ones in red."""
    items = sorted(hist.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    labels = [k for k, _ in items]
    good = set(good)
    return render_bars(labels, [v for _, v in items], path, "bitstring", "count", title,
                       highlight=[i for i, k in enumerate(labels) if k in good])


def write_long_csv(rows: Sequence[Mapping], path) -> Path:
    """Long-format table (one observation per row) for external plotting tools."""
    path = Path(path)
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path
