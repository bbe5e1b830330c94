"""Minimal deterministic SVG figures.

Hand-rolled rather than delegated to a plotting library so identical inputs
produce identical bytes: floats are formatted to 6 significant digits and
element order is fixed.
"""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 56


def _f(x: float) -> str:
    s = f"{float(x):.6g}"
    return "0" if s == "-0" else s


class Canvas:
    """Data-space drawing surface mapped onto a fixed-size SVG viewport."""

    def __init__(self, xlim, ylim, title=""):
        self.xlim, self.ylim = xlim, ylim
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        if title:
            self.parts.append(
                f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
                f'font-family="sans-serif" font-size="14">{title}</text>')
        self._axes()

    def _sx(self, x):
        x0, x1 = self.xlim
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def _sy(self, y):
        y0, y1 = self.ylim
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    def _axes(self):
        x0, y0 = MARGIN, HEIGHT - MARGIN
        x1, y1 = WIDTH - MARGIN, MARGIN
        self.parts.append(
            f'<path d="M {x0} {y1} L {x0} {y0} L {x1} {y0}" fill="none" '
            'stroke="black" stroke-width="1"/>')
        for (v, anchor, x, y) in (
                (self.xlim[0], "middle", x0, y0 + 18),
                (self.xlim[1], "middle", x1, y0 + 18),
                (self.ylim[0], "end", x0 - 6, y0 + 4),
                (self.ylim[1], "end", x0 - 6, y1 + 4)):
            self.parts.append(
                f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" '
                f'font-family="sans-serif" font-size="11">{_f(v)}</text>')

    def polyline(self, pts, color, width=1.5, cls=""):
        coords = " ".join(f"{_f(self._sx(x))},{_f(self._sy(y))}" for x, y in pts)
        attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<polyline{attr} points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_f(width)}"/>')

    def marker(self, x, y, color, r=3.5, cls=""):
        attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<circle{attr} cx="{_f(self._sx(x))}" cy="{_f(self._sy(y))}" '
            f'r="{_f(r)}" fill="{color}"/>')

    def bar(self, x, y, width_data, color, cls=""):
        x0 = self._sx(x - width_data / 2)
        x1 = self._sx(x + width_data / 2)
        ytop = self._sy(y)
        ybase = self._sy(max(self.ylim[0], 0.0))
        attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect{attr} x="{_f(x0)}" y="{_f(ytop)}" width="{_f(x1 - x0)}" '
            f'height="{_f(ybase - ytop)}" fill="{color}"/>')

    def label(self, x, y, text, color="black"):
        self.parts.append(
            f'<text x="{_f(self._sx(x))}" y="{_f(self._sy(y))}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{text}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def data_limits(arrays, pad=0.08):
    pts = np.vstack([np.asarray(a, float).reshape(-1, 2) for a in arrays])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo = lo - pad * span
    hi = hi + pad * span
    return (float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1]))
