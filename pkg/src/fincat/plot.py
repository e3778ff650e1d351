"""Static SVG line charts, generated without any plotting dependency."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 480, 320
MARGIN = 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _finite(xs, ys):
    return [(x, y) for x, y in zip(xs, ys) if y is not None and math.isfinite(y)]


def line_chart(x: Sequence[float], series: dict[str, Sequence[float | None]],
               xlabel: str = "", ylabel: str = "", title: str = "") -> str:
    """Markers plus a polyline per series; missing and non-finite points are skipped."""
    pts = {name: _finite(x, ys) for name, ys in series.items()}
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(0.0, min(ally)), max(ally)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" transform="rotate(-90 14 {HEIGHT / 2})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle">{escape(title)}</text>',
    ]
    for k in range(5):
        yv = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{MARGIN - 4}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for xv in sorted(set(allx)):
        out.append(f'<text x="{sx(xv):.1f}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle">{xv:g}</text>')
    for i, (name, p) in enumerate(pts.items()):
        color = COLORS[i % len(COLORS)]
        if p:
            path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in p)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"/>')
            out.extend(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="{color}"/>' for a, b in p)
        ly = MARGIN + 14 * i
        out.append(f'<text x="{WIDTH - MARGIN}" y="{ly}" text-anchor="end" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
