"""Raster versions of the report plots, drawn with matplotlib.

The SVG written by :mod:`svgplot` is the canonical, byte-stable artifact;
these PNGs are a convenience for reading reports and are not part of the
determinism guarantee.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .svgplot import sweep_series, tradeoff_series  # noqa: E402


def _draw(series, title, xlabel, ylabel, path):
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=100)
    for s in series:
        line = ax.loglog(s.x, s.y, "o", label=s.label)[0]
        if s.fit is not None:
            m, k = s.fit
            xx = np.array([s.x.min(), s.x.max()])
            ax.loglog(xx, 10 ** (m * np.log10(xx) + k), "--", color=line.get_color(),
                      label=f"slope {m:.3f}")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def sweep_png(result, path):
    return _draw(sweep_series(result), "frame-bound increments", "|1 - alpha|",
                 "|sigma(alpha) - sigma(1)|", path)


def tradeoff_png(table, path):
    return _draw(tradeoff_series(table), "truncation tradeoff", "epsilon", "norm", path)
