"""Minimal SVG line charts: axes, optional log scales, a few series.

Plots are written directly as SVG markup so results stay inspectable
without a plotting stack.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["LineChart"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _nice_ticks(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _log_ticks(lo, hi):
    lo_d = int(math.floor(math.log10(lo)))
    hi_d = int(math.ceil(math.log10(hi)))
    step = max(1, (hi_d - lo_d) // 8)
    return [10.0 ** d for d in range(lo_d, hi_d + 1, step)]


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


class LineChart:
    """Accumulates (x, y) series and renders one SVG chart."""

    def __init__(self, title="", xlabel="", ylabel="", xlog=False, ylog=False):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.xlog = xlog
        self.ylog = ylog
        self.series = []

    def add(self, name, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if self.xlog:
            ok &= x > 0
        if self.ylog:
            ok &= y > 0
        if ok.sum() >= 2:
            self.series.append((name, x[ok], y[ok]))
        return self

    def _limits(self):
        xs = np.concatenate([s[1] for s in self.series])
        ys = np.concatenate([s[2] for s in self.series])
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        if not self.xlog and x1 == x0:
            x1 = x0 + 1
        if not self.ylog:
            pad = 0.05 * (y1 - y0 or 1.0)
            y0, y1 = y0 - pad, y1 + pad
        return x0, x1, y0, y1

    def render(self):
        if not self.series:
            return ('<svg xmlns="http://www.w3.org/2000/svg" width="720" '
                    'height="480"><text x="20" y="40">no data</text></svg>')
        x0, x1, y0, y1 = self._limits()

        def sx(v):
            if self.xlog:
                f = (math.log10(v) - math.log10(x0)) / \
                    max(math.log10(x1) - math.log10(x0), 1e-12)
            else:
                f = (v - x0) / (x1 - x0)
            return _ML + f * (_W - _ML - _MR)

        def sy(v):
            if self.ylog:
                f = (math.log10(v) - math.log10(y0)) / \
                    max(math.log10(y1) - math.log10(y0), 1e-12)
            else:
                f = (v - y0) / (y1 - y0)
            return _H - _MB - f * (_H - _MT - _MB)

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
               f'height="{_H}" font-family="monospace" font-size="12">']
        out.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>')
        out.append(f'<text x="{_W // 2}" y="20" text-anchor="middle" '
                   f'font-size="14">{self.title}</text>')
        # axes box
        out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
                   f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>')
        xticks = _log_ticks(x0, x1) if self.xlog else _nice_ticks(x0, x1)
        yticks = _log_ticks(y0, y1) if self.ylog else _nice_ticks(y0, y1)
        for v in xticks:
            if not (x0 <= v <= x1):
                continue
            px = sx(v)
            out.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" '
                       f'y2="{_H - _MB + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.1f}" y="{_H - _MB + 18}" '
                       f'text-anchor="middle">{_fmt(v)}</text>')
        for v in yticks:
            if not (y0 <= v <= y1):
                continue
            py = sy(v)
            out.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" '
                       f'y2="{py:.1f}" stroke="black"/>')
            out.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" '
                       f'text-anchor="end">{_fmt(v)}</text>')
        out.append(f'<text x="{_W // 2}" y="{_H - 15}" '
                   f'text-anchor="middle">{self.xlabel}</text>')
        out.append(f'<text x="18" y="{_H // 2}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {_H // 2})">{self.ylabel}</text>')
        for i, (name, x, y) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            ly = _MT + 16 + 16 * i
            out.append(f'<line x1="{_W - _MR - 150}" y1="{ly}" '
                       f'x2="{_W - _MR - 125}" y2="{ly}" stroke="{color}" '
                       f'stroke-width="2"/>')
            out.append(f'<text x="{_W - _MR - 120}" y="{ly + 4}">{name}</text>')
        out.append("</svg>")
        return "\n".join(out)

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.render())
        return path
