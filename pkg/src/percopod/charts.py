"""Self-contained SVG line charts for run bundles.

Presentation only: nothing here feeds back into the solver or the
comparison logic.  Each distributed field gets a two-panel figure
(initial/final values by node, plus per-node trajectories); the scalar
dissolution curve gets a single panel.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SECONDS_PER_DAY = 86400.0


def field_chart(path, times_d, nodal_values, title, unit):
    """Two panels: node-indexed initial/final scatter and time trajectories."""
    times_s = np.asarray(times_d) * _SECONDS_PER_DAY
    nodal_values = np.asarray(nodal_values)
    node_ids = np.arange(nodal_values.shape[1])

    fig, (left, right) = plt.subplots(1, 2, figsize=(11.0, 4.2))
    left.plot(node_ids, nodal_values[0], ".", ms=3, label="initial")
    left.plot(node_ids, nodal_values[-1], ".", ms=3, label="final")
    left.set_xlabel("node id")
    left.set_ylabel(unit)
    left.set_title(f"{title}: initial and final")
    left.legend(loc="best")

    right.plot(times_s, nodal_values, lw=0.4, alpha=0.5)
    right.set_xlabel("time (s)")
    right.set_ylabel(unit)
    right.set_title(f"{title}: node trajectories")

    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def scalar_chart(path, times_d, values, title, unit):
    """Single panel for a spatially uniform quantity."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(np.asarray(times_d) * _SECONDS_PER_DAY, np.asarray(values), lw=1.5)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(unit)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
