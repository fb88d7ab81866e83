"""Figure rendering for experiment result tables.

Each table is plotted as its remaining columns against the first, with a
log ordinate where the data spans decades (the loss sweep).  Files are
written headlessly next to the delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runner import ResultTable

__all__ = ["render_figure"]

_LOG_EXPERIMENTS = {"loss_sweep"}


def render_figure(table: ResultTable, path) -> bool:
    """Render a table to an image file; returns False for single-row tables."""
    if table.rows.shape[0] < 2:
        return False
    x = table.rows[:, 0]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for j, name in enumerate(table.columns[1:], start=1):
        ax.plot(x, table.rows[:, j], label=name)
    ax.set_xlabel(table.columns[0])
    ax.set_ylabel("value")
    if table.experiment in _LOG_EXPERIMENTS:
        positive = table.rows[:, 1:][table.rows[:, 1:] > 0.0]
        if positive.size and positive.max() / positive.min() > 1.0e3:
            ax.set_yscale("log")
    ax.set_title(table.experiment)
    ax.grid(True, alpha=0.4)
    if len(table.columns) > 2:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True
