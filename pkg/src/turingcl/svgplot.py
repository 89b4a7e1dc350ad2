"""Minimal SVG line plots, enough for stability diagrams and time series."""

from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot(series, path, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400, hline: float | None = 0.0) -> None:
    """Write polylines for ``series`` = [(label, x, y), ...]; non-finite points break lines."""
    pad_l, pad_r, pad_t, pad_b = 70, 20, 36, 50
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    fin = np.isfinite(ys) & np.isfinite(xs)
    x0, x1 = (float(xs[fin].min()), float(xs[fin].max())) if fin.any() else (0.0, 1.0)
    y0, y1 = (float(ys[fin].min()), float(ys[fin].max())) if fin.any() else (0.0, 1.0)
    if hline is not None:
        y0, y1 = min(y0, hline), max(y1, hline)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    W, H = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * W

    def py(y):
        return pad_t + (1 - (y - y0) / (y1 - y0)) * H

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{pad_l}" y="{pad_t}" width="{W}" height="{H}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    out.append(f'<text x="{pad_l + W / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{pad_t + H / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {pad_t + H / 2})">{ylabel}</text>')
    for t in np.linspace(x0, x1, 5):
        out.append(f'<text x="{px(t):.1f}" y="{pad_t + H + 16}" text-anchor="middle" font-size="10">{_fmt(t)}</text>')
    for t in np.linspace(y0, y1, 5):
        out.append(f'<text x="{pad_l - 6}" y="{py(t) + 3:.1f}" text-anchor="end" font-size="10">{_fmt(t)}</text>')
    if hline is not None:
        out.append(f'<line x1="{pad_l}" x2="{pad_l + W}" y1="{py(hline):.1f}" y2="{py(hline):.1f}" '
                   'stroke="gray" stroke-dasharray="4 3"/>')
    for idx, (label, x, y) in enumerate(series):
        col = PALETTE[idx % len(PALETTE)]
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        # split into runs of finite points
        runs, cur = [], []
        for xi, yi, good in zip(x, y, ok):
            if good:
                cur.append(f"{px(xi):.2f},{py(yi):.2f}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{" ".join(run)}"/>')
        out.append(f'<text x="{pad_l + 8}" y="{pad_t + 14 + 14 * idx}" font-size="11" fill="{col}">{label}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
