"""Figure rendering for scenario artifacts.

Plots are drawn on explicit Figure objects through the Agg canvas, so no
global pyplot state is touched and headless runs need no display.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

FIGURE_SIZE = (7.0, 4.5)
FIGURE_DPI = 110


def render(plot_fn, path) -> None:
    """Draw ``plot_fn(fig)`` on a fresh figure and write it to ``path``."""
    fig = Figure(figsize=FIGURE_SIZE, dpi=FIGURE_DPI)
    FigureCanvasAgg(fig)
    plot_fn(fig)
    fig.savefig(path, bbox_inches="tight")


def metric_bars(fig: Figure, names, values, title: str) -> None:
    """Log-scale bar chart for a handful of named non-negative metrics."""
    ax = fig.subplots()
    positions = np.arange(len(names))
    floor = 1e-17
    ax.bar(positions, np.maximum(np.abs(values), floor), color="#4878a8")
    ax.set_yscale("log")
    ax.set_xticks(positions)
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_ylabel("magnitude")
    ax.grid(True, axis="y", alpha=0.3)


def series_lines(fig: Figure, x, named_series, title: str, xlabel: str,
                 ylabel: str, logy: bool = False) -> None:
    """One axis with a line per (label, values) pair."""
    ax = fig.subplots()
    for label, values in named_series:
        ax.plot(x, values, label=label, linewidth=1.4)
    if logy:
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)


def indexed_points(fig: Figure, named_values, title: str, ylabel: str,
                   logy: bool = False) -> None:
    """Scatter of one or more value lists against their index."""
    ax = fig.subplots()
    for label, values in named_values:
        ax.plot(np.arange(len(values)), values, "o-", label=label,
                markersize=4, linewidth=1.0)
    if logy:
        ax.set_yscale("log")
    ax.set_title(title)
    ax.set_xlabel("index")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
