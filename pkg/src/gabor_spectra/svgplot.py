"""Dependency-free SVG plots with fixed geometry and number formatting.

Byte-identical output for identical input is the point of this module:
coordinates are rounded to two decimals and nothing depends on the
platform, the clock or a font backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=170, top=40, bottom=55)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    fit: tuple | None = None  # (slope, intercept) in log10-log10 units


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _ticks(lo, hi):
    a, b = math.floor(lo), math.ceil(hi)
    if a == b:
        b = a + 1
    return list(range(a, b + 1))


def render(series, title: str, xlabel: str, ylabel: str) -> str:
    """SVG text of a log-log plot of ``series`` with optional fitted lines."""
    if not series:
        raise ValueError("nothing to plot")
    pts = [(np.log10(s.x), np.log10(s.y)) for s in series]
    allx = np.concatenate([p[0] for p in pts])
    ally = np.concatenate([p[1] for p in pts])
    xt, yt = _ticks(allx.min(), allx.max()), _ticks(ally.min(), ally.max())
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def X(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{_f(WIDTH / 2)}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="black"/>']
    for t in xt:
        out.append(f'<line x1="{_f(X(t))}" y1="{_f(Y(y0))}" x2="{_f(X(t))}" y2="{_f(Y(y0) + 5)}" stroke="black"/>')
        out.append(f'<text x="{_f(X(t))}" y="{_f(Y(y0) + 18)}" text-anchor="middle">1e{t}</text>')
    for t in yt:
        out.append(f'<line x1="{_f(X(x0) - 5)}" y1="{_f(Y(t))}" x2="{_f(X(x0))}" y2="{_f(Y(t))}" stroke="black"/>')
        out.append(f'<text x="{_f(X(x0) - 8)}" y="{_f(Y(t) + 4)}" text-anchor="end">1e{t}</text>')
    out.append(f'<text x="{_f(MARGIN["left"] + pw / 2)}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{_f(MARGIN["top"] + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_f(MARGIN["top"] + ph / 2)})">{escape(ylabel)}</text>')
    for i, (s, (lx, ly)) in enumerate(zip(series, pts)):
        c = COLORS[i % len(COLORS)]
        for a, b in zip(lx, ly):
            out.append(f'<circle cx="{_f(X(a))}" cy="{_f(Y(b))}" r="3" fill="{c}"/>')
        legend = s.label
        if s.fit is not None:
            m, k = s.fit
            xa, xb = lx.min(), lx.max()
            out.append(f'<line x1="{_f(X(xa))}" y1="{_f(Y(m * xa + k))}" x2="{_f(X(xb))}" '
                       f'y2="{_f(Y(m * xb + k))}" stroke="{c}" stroke-dasharray="5,3"/>')
            legend += f" (slope {m:.3f})"
        ly_ = MARGIN["top"] + 16 + 18 * i
        lx_ = WIDTH - MARGIN["right"] + 10
        out.append(f'<circle cx="{lx_}" cy="{ly_ - 4}" r="3" fill="{c}"/>')
        out.append(f'<text x="{lx_ + 8}" y="{ly_}">{escape(legend)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _fit(x, y):
    m, k = np.polyfit(np.log10(x), np.log10(y), 1)
    return float(m), float(k)


def sweep_series(result, fit_window=None):
    """Increment series ``|sigma(alpha) - sigma(1)|`` against ``|1 - alpha|``."""
    from .deform import FIT_WINDOW, increments

    fw = fit_window or FIT_WINDOW
    out = []
    for side in ("A", "B"):
        d, inc = increments(result, side, "both", fw)
        keep = inc > 0
        d, inc = d[keep], inc[keep]
        if len(d) == 0:
            continue
        out.append(Series(f"|d{side}|", d, inc, _fit(d, inc) if len(d) >= 2 else None))
    return out


def tradeoff_series(table):
    out = []
    for region in table.slopes:
        rows = [r for r in table.rows if r[1] == region]
        eps = np.array([r[0] for r in rows])
        for idx, name in ((2, "err"), (3, "growth")):
            y = np.array([r[idx] for r in rows])
            slope = table.slopes[region][0 if name == "err" else 1]
            # intercept from the same least-squares fit used for the slope
            k = float(np.mean(np.log10(y)) - slope * np.mean(np.log10(eps)))
            out.append(Series(f"{region} {name}", eps, y, (slope, k)))
    return out


def emit_plot(data, path) -> Path:
    """Write ``plot.svg`` for a sweep result or a tradeoff table."""
    from .deform import SweepResult
    from .modspace import TradeoffTable

    if isinstance(data, SweepResult):
        if len(data.rows) < 2:
            raise ValueError("need at least two sweep rows")
        series = sweep_series(data)
        if not series:
            raise ValueError("no nonzero increments to plot")
        text = render(series, "frame-bound increments", "|1 - alpha|", "|sigma(alpha) - sigma(1)|")
    elif isinstance(data, TradeoffTable):
        if len(data.rows) < 2:
            raise ValueError("need at least two table rows")
        text = render(tradeoff_series(data), "truncation tradeoff", "epsilon", "norm")
    else:
        raise TypeError("emit_plot takes a SweepResult or a TradeoffTable")
    p = Path(path)
    p.write_text(text)
    return p
