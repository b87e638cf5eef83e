"""Artifact writers: a dependency-free SVG line plot and JSON helpers with
stable formatting, so repeated runs produce byte-identical files."""

from __future__ import annotations

import hashlib
import json
from typing import Sequence

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def line_plot_svg(series: Sequence[tuple[str, np.ndarray, np.ndarray]], title: str = "",
                  xlabel: str = "", width: int = 640, height: int = 400) -> str:
    """Each series gets its own vertical scale (min..max of that series) so
    quantities of different magnitude share one panel; the legend shows ranges."""
    pad_l, pad_r, pad_t, pad_b = 60, 20, 40, 50
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    x0, x1 = float(np.min(xs_all)), float(np.max(xs_all))
    if x1 == x0:
        x1 = x0 + 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{pad_l + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="{pad_l}" y="{pad_t + ph + 16}" font-size="10">{x0:.4g}</text>',
           f'<text x="{pad_l + pw}" y="{pad_t + ph + 16}" text-anchor="end" font-size="10">{x1:.4g}</text>']
    for k, (name, xs, ys) in enumerate(series):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        y0, y1 = float(np.min(ys)), float(np.max(ys))
        span = y1 - y0 if y1 > y0 else 1.0
        px = pad_l + (xs - x0) / (x1 - x0) * pw
        py = pad_t + ph - (ys - y0) / span * ph
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        out.append(f'<text x="{pad_l + 8}" y="{pad_t + 16 + 14 * k}" font-size="11" fill="{color}">'
                   f'{name}: [{y0:.6g}, {y1:.6g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
