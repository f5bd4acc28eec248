"""Deterministic SVG renderer for sweep results.

The output is plain hand-assembled SVG so the bytes are identical across
platforms and library versions: one polyline per attack, a legend, labeled
axes. Rows with NaN PNR (the no-attack baseline) are drawn as a horizontal
reference line instead of a curve.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .errors import ConfigurationError
from .harness import SweepRow, read_sweep_csv

__all__ = ["render_sweep_svg", "plot_csv", "PALETTE"]

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000", "#aec7e8",
)

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 72, 180, 32, 56  # margins; right one holds the legend


def _fmt(v: float) -> str:
    """Shortest stable decimal for tick labels and coordinates."""
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return s if s else "0"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 10))
        t += step
    return out


def render_sweep_svg(rows: list[SweepRow], title: str = "accuracy vs PNR") -> str:
    """Build the SVG text for a list of sweep rows (sorted internally)."""
    if not rows:
        raise ConfigurationError("no rows to plot")
    curves: dict[str, list[tuple[float, float]]] = {}
    baselines: dict[str, float] = {}
    for r in rows:
        if math.isnan(r.pnr_db):
            baselines[r.attack] = r.accuracy
        else:
            curves.setdefault(r.attack, []).append((r.pnr_db, r.accuracy))
    for pts in curves.values():
        pts.sort()
    xs = [x for pts in curves.values() for x, _ in pts]
    if not xs and not baselines:
        raise ConfigurationError("no plottable rows")
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    y_lo, y_hi = 0.0, 1.0

    px_w = _W - _ML - _MR
    px_h = _H - _MT - _MB

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * px_w

    def sy(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * px_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_ML + px_w / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        # axes
        f'<line x1="{_ML}" y1="{_MT + px_h}" x2="{_ML + px_w}" y2="{_MT + px_h}" '
        f'stroke="black" stroke-width="1"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + px_h}" '
        f'stroke="black" stroke-width="1"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        parts.append(f'<line x1="{x:.1f}" y1="{_MT + px_h}" x2="{x:.1f}" '
                     f'y2="{_MT + px_h + 5}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x:.1f}" y="{_MT + px_h + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        parts.append(f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_ML - 9}" y="{y + 4:.1f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    parts.append(f'<text x="{_ML + px_w / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">PNR (dB)</text>')
    parts.append(f'<text x="18" y="{_MT + px_h / 2:.1f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 18 {_MT + px_h / 2:.1f})">accuracy</text>')

    names = sorted(set(curves) | set(baselines))
    colors = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(names)}
    for name in names:
        color = colors[name]
        if name in curves:
            pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in curves[name])
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="2"/>')
            for x, y in curves[name]:
                parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" '
                             f'fill="{color}"/>')
        if name in baselines:
            y = sy(baselines[name])
            parts.append(f'<line x1="{_ML}" y1="{y:.1f}" x2="{_ML + px_w}" '
                         f'y2="{y:.1f}" stroke="{color}" stroke-width="1.5" '
                         f'stroke-dasharray="6,4"/>')
    # legend, one entry per attack
    lx = _ML + px_w + 16
    for i, name in enumerate(names):
        ly = _MT + 16 + 18 * i
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                     f'stroke="{colors[name]}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly + 4}" font-family="sans-serif" '
                     f'font-size="11">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_csv(csv_path, svg_path, title: str = "accuracy vs PNR") -> None:
    rows = read_sweep_csv(csv_path)
    svg = render_sweep_svg(rows, title=title)
    with open(svg_path, "w", newline="") as fh:
        fh.write(svg)
