"""Static SVG scatter/line plots with deterministic output."""

from __future__ import annotations

import math
from typing import Sequence

WIDTH, HEIGHT, PAD = 480, 360, 50


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def scatter_svg(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *, title: str = "",
                xlabel: str = "", ylabel: str = "", lines: bool = False, logy: bool = False) -> str:
    """Render ``(label, xs, ys)`` series; ``logy`` plots ``log10(y)``."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    pts = []
    for label, xs, ys in series:
        yy = [math.log10(y) if logy else y for y in ys if (y > 0 or not logy)]
        xx = [x for x, y in zip(xs, ys) if (y > 0 or not logy)]
        pts.append((label, list(xx), yy))
    allx = [x for _, xs, _ in pts for x in xs] or [0.0, 1.0]
    ally = [y for _, _, ys in pts for y in ys] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    if y0 == y1:
        y0, y1 = y0 - 1, y1 + 1

    def X(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def Y(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(X(t))}" y="{HEIGHT - PAD + 16}" font-size="10" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        label = f"1e{t:.2g}" if logy else f"{t:.3g}"
        out.append(f'<text x="{PAD - 6}" y="{_fmt(Y(t) + 3)}" font-size="10" text-anchor="end">{label}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="20" font-size="13" text-anchor="middle">{title}</text>')
    if xlabel:
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="11" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{HEIGHT / 2}" font-size="11" text-anchor="middle" '
                   f'transform="rotate(-90 14 {HEIGHT / 2})">{ylabel}</text>')
    for idx, (label, xs, ys) in enumerate(pts):
        color = colors[idx % len(colors)]
        if lines and len(xs) > 1:
            path = " ".join(f"{_fmt(X(x))},{_fmt(Y(y))}" for x, y in zip(xs, ys))
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_fmt(X(x))}" cy="{_fmt(Y(y))}" r="3" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - PAD}" y="{PAD + 14 * idx}" font-size="10" fill="{color}" '
                   f'text-anchor="end">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
