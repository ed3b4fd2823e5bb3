"""File-output rendering of the visual tests.

matplotlib import is deferred and forced onto the Agg backend so the
package never needs a display; every function writes a PNG and returns
the path it wrote.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .stat_tests import Histogram


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_scatter(rows: np.ndarray, path: str, title: Optional[str] = None) -> str:
    """Scatter plot of an (n, 2) or (n, 3) point table."""
    plt = _pyplot()
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] not in (2, 3):
        raise ValueError(f"expected an (n, 2) or (n, 3) table, got {rows.shape}")
    fig = plt.figure(figsize=(6, 6))
    if rows.shape[1] == 2:
        ax = fig.add_subplot(111)
        ax.plot(rows[:, 0], rows[:, 1], ".", markersize=2)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    else:
        ax = fig.add_subplot(111, projection="3d")
        ax.scatter(rows[:, 0], rows[:, 1], rows[:, 2], s=2)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_zlabel("z")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_histogram(hist: Histogram, path: str, title: Optional[str] = None) -> str:
    """Bar chart of a histogram with the uniform expectation marked."""
    plt = _pyplot()
    width = (hist.upper - hist.lower) / hist.bin_count
    lefts = [hist.lower + i * width for i in range(hist.bin_count)]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(lefts, hist.counts, width=width, align="edge", edgecolor="white")
    ax.axhline(hist.total / hist.bin_count, color="black", linestyle="--",
               linewidth=1, label="uniform expectation")
    ax.set_xlabel("value")
    ax.set_ylabel("count")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
