"""Tiny dependency-free SVG line charts."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Tuple
from xml.sax.saxutils import escape

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        pad = abs(lo) * 0.05 or 0.5
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def line_chart(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    y_range: Tuple[float, float] | None = None,
    width: int = 720,
    height: int = 440,
) -> str:
    """Render ``(name, xs, ys)`` series as polylines; returns the SVG text."""
    if not series or not any(len(xs) for _, xs, _ in series):
        raise ValueError("nothing to plot")
    left, right, top, bottom = 70, 160, 40, 60
    pw, ph = width - left - right, height - top - bottom

    all_x = [float(v) for _, xs, _ in series for v in xs]
    all_y = [float(v) for _, _, ys in series for v in ys]
    x0, x1 = min(all_x), max(all_x)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y0, y1 = y_range if y_range is not None else _nice_range(min(all_y), max(all_y))

    def px(v):
        return left + (float(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1 - (float(v) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        yv = y0 + (y1 - y0) * i / 5
        out.append(
            f'<line x1="{left}" y1="{py(yv):.2f}" x2="{left + pw}" y2="{py(yv):.2f}" stroke="#ddd"/>'
            f'<text x="{left - 6}" y="{py(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>'
        )
    ticks = sorted(set(all_x))
    step = max(1, len(ticks) // 10)
    for xv in ticks[::step]:
        out.append(
            f'<text x="{px(xv):.2f}" y="{top + ph + 18}" text-anchor="middle">{xv:g}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">{escape(x_label)}</text>'
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(y_label)}</text>'
    )
    for i, (name, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for a, b in zip(xs, ys):
            out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 20 * i
        out.append(
            f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 40}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
            f'<text x="{left + pw + 46}" y="{ly + 4}">{escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_chart(path, *args, **kwargs) -> Path:
    path = Path(path)
    path.write_text(line_chart(*args, **kwargs), encoding="utf-8")
    return path
