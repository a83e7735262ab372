"""Matplotlib figures of curves and orbits."""
from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .paths import PolarPath  # noqa: E402


def plot_paths(paths: Sequence[PolarPath], out: str, labels: Optional[Sequence[str]] = None,
               title: Optional[str] = None, dpi: int = 120) -> str:
    """Draw paths in the plane with the pedal point marked and save to ``out``."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, path in enumerate(paths):
        label = labels[i] if labels and i < len(labels) else None
        for j, sl in enumerate(path.branches()):
            ax.plot(path.x[sl], path.y[sl], lw=1.2, color=f"C{i}", label=label if j == 0 else None)
    ax.plot([0], [0], "o", color="red", ms=4, label="pedal point")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(out, dpi=dpi)
    plt.close(fig)
    return out
