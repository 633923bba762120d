"""Bare-bones SVG charts: line plots, a heatmap and a bar chart.

Only enough to eyeball results without a plotting dependency; the CSV files
next to each figure are the real output.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _frame(title, xlabel, ylabel, body, x_ticks, y_ticks) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" fill="none" stroke="black"/>',
    ]
    for px, label in x_ticks:
        parts.append(f'<text x="{px:.1f}" y="{H - BOTTOM + 16}" text-anchor="middle">{escape(label)}</text>')
    for py, label in y_ticks:
        parts.append(f'<text x="{LEFT - 6}" y="{py + 4:.1f}" text-anchor="end">{escape(label)}</text>')
    parts.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{H / 2}" text-anchor="middle" transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>')
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts)


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def line_plot(path, series, title="", xlabel="", ylabel="", logy=False, max_points=1000) -> Path:
    """``series``: iterable of ``(xs, ys, label)``; long series are strided down to ``max_points``."""
    prepared = []
    for xs, ys, label in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if len(xs) > max_points:
            idx = np.unique(np.linspace(0, len(xs) - 1, max_points).astype(int))
            xs, ys = xs[idx], ys[idx]
        if logy:
            keep = ys > 0
            xs, ys = xs[keep], np.log10(ys[keep])
        keep = np.isfinite(ys)
        prepared.append((xs[keep], ys[keep], label))
    all_x = np.concatenate([p[0] for p in prepared]) if prepared else np.zeros(1)
    all_y = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(1)
    if all_x.size == 0:
        all_x = all_y = np.zeros(1)
    x0, x1 = float(all_x.min()), float(all_x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    sx = _scale(x0, x1, LEFT, W - RIGHT)
    sy = _scale(y0, y1, H - BOTTOM, TOP)
    body = []
    for k, (xs, ys, label) in enumerate(prepared):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        body.append(f'<text x="{W - RIGHT - 8}" y="{TOP + 16 + 16 * k}" text-anchor="end" fill="{color}">{escape(label)}</text>')
    fmt_y = (lambda v: f"1e{v:.1f}") if logy else (lambda v: f"{v:.3g}")
    x_ticks = [(sx(v), f"{v:.3g}") for v in _ticks(x0, x1)]
    y_ticks = [(sy(v), fmt_y(v)) for v in _ticks(y0, y1)]
    path = Path(path)
    path.write_text(_frame(title, xlabel, ylabel, body, x_ticks, y_ticks))
    return path


def _color(v, lo, hi):
    # blue -> white -> red
    s = 0.0 if hi == lo else (v - lo) / (hi - lo) * 2.0 - 1.0
    s = max(-1.0, min(1.0, s))
    if s < 0:
        c = int(255 * (1 + s))
        return f"rgb({c},{c},255)"
    c = int(255 * (1 - s))
    return f"rgb(255,{c},{c})"


def heatmap(path, t_values, x_values, u, title="", max_cells=(100, 128)) -> Path:
    """Colour map of ``u[t, x]`` with time on the horizontal axis."""
    u = np.asarray(u, dtype=float)
    ti = np.unique(np.linspace(0, len(t_values) - 1, min(len(t_values), max_cells[0])).astype(int))
    xi = np.unique(np.linspace(0, len(x_values) - 1, min(len(x_values), max_cells[1])).astype(int))
    lo, hi = float(np.nanmin(u)), float(np.nanmax(u))
    lim = max(abs(lo), abs(hi))
    cw = (W - LEFT - RIGHT) / len(ti)
    ch = (H - TOP - BOTTOM) / len(xi)
    body = []
    for a, i in enumerate(ti):
        for b, j in enumerate(xi):
            y = H - BOTTOM - (b + 1) * ch
            body.append(f'<rect x="{LEFT + a * cw:.2f}" y="{y:.2f}" width="{cw + 0.3:.2f}" '
                        f'height="{ch + 0.3:.2f}" fill="{_color(u[i, j], -lim, lim)}"/>')
    t0, t1 = float(t_values[0]), float(t_values[-1])
    x0, x1 = float(x_values[0]), float(x_values[-1])
    sx = _scale(t0, t1, LEFT, W - RIGHT)
    sy = _scale(x0, x1, H - BOTTOM, TOP)
    x_ticks = [(sx(v), f"{v:.2g}") for v in _ticks(t0, t1)]
    y_ticks = [(sy(v), f"{v:.2g}") for v in _ticks(x0, x1)]
    path = Path(path)
    path.write_text(_frame(title + f"  (colour range +-{lim:.3g})", "t", "x", body, x_ticks, y_ticks))
    return path


def bar_chart(path, labels, values, title="", ylabel="") -> Path:
    values = [float(v) if v is not None and math.isfinite(float(v)) else 0.0 for v in values]
    top = max(values) if values and max(values) > 0 else 1.0
    sy = _scale(0.0, top * 1.1, H - BOTTOM, TOP)
    n = max(len(values), 1)
    slot = (W - LEFT - RIGHT) / n
    body = []
    x_ticks = []
    for k, (label, v) in enumerate(zip(labels, values)):
        x = LEFT + k * slot + slot * 0.2
        body.append(f'<rect x="{x:.1f}" y="{sy(v):.1f}" width="{slot * 0.6:.1f}" '
                    f'height="{H - BOTTOM - sy(v):.1f}" fill="{PALETTE[k % len(PALETTE)]}"/>')
        body.append(f'<text x="{x + slot * 0.3:.1f}" y="{sy(v) - 4:.1f}" text-anchor="middle">{v:.4g}</text>')
        x_ticks.append((x + slot * 0.3, str(label)))
    y_ticks = [(sy(v), f"{v:.3g}") for v in _ticks(0.0, top * 1.1)]
    path = Path(path)
    path.write_text(_frame(title, "", ylabel, body, x_ticks, y_ticks))
    return path
