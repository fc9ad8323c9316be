"""Deterministic SVG rendering of reject curves.

Hand-written SVG keeps the output byte-identical across runs and machines:
coordinates are printed with two decimals and nothing time- or
environment-dependent is embedded.
"""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from rejectlab.curves import METRICS, RejectCurve

PANEL_W = 800
PANEL_H = 600
MARGIN = dict(left=70, right=30, top=50, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
TICKS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

TITLES = {
    "accuracy": "accuracy-reject curve",
    "precision": "precision-reject curve",
    "recall": "recall-reject curve",
    "f1": "F1-reject curve",
}


def _segments(c: RejectCurve) -> list:
    """Runs of consecutive defined points; an undefined value breaks the line."""
    runs, cur = [], []
    for a, v in zip(c.acceptance_rate, c.value):
        if np.isnan(v):
            if cur:
                runs.append(cur)
            cur = []
        else:
            cur.append((float(a), float(v)))
    if cur:
        runs.append(cur)
    return runs


def _panel(x0: int, title: str, series: Sequence) -> list:
    left, top = x0 + MARGIN["left"], MARGIN["top"]
    w = PANEL_W - MARGIN["left"] - MARGIN["right"]
    h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]

    def px(a):
        return f"{left + a * w:.2f}"

    def py(v):
        return f"{top + (1.0 - v) * h:.2f}"

    out = [f'<g class="panel">', f'<text x="{x0 + PANEL_W / 2:.2f}" y="30" text-anchor="middle" font-size="18">{escape(title)}</text>']
    out.append(f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#000"/>')
    for t in TICKS:
        out.append(f'<line x1="{px(t)}" y1="{top + h}" x2="{px(t)}" y2="{top + h + 6}" stroke="#000"/>')
        out.append(f'<text x="{px(t)}" y="{top + h + 22}" text-anchor="middle" font-size="12">{t:.1f}</text>')
        out.append(f'<line x1="{left - 6}" y1="{py(t)}" x2="{left}" y2="{py(t)}" stroke="#000"/>')
        out.append(f'<text x="{left - 10}" y="{py(t)}" text-anchor="end" dominant-baseline="middle" font-size="12">{t:.1f}</text>')
    out.append(f'<text x="{left + w / 2:.2f}" y="{PANEL_H - 15}" text-anchor="middle" font-size="14">acceptance rate</text>')
    out.append(
        f'<text x="{x0 + 20}" y="{top + h / 2:.2f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 {x0 + 20} {top + h / 2:.2f})">{escape(title.split("-")[0])}</text>'
    )
    for k, (label, c) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        for run in _segments(c):
            if len(run) == 1:
                a, v = run[0]
                out.append(f'<circle cx="{px(a)}" cy="{py(v)}" r="2" fill="{color}"/>')
            else:
                pts = " ".join(f"{px(a)},{py(v)}" for a, v in run)
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 20 + 20 * k
        out.append(f'<line x1="{left + 15}" y1="{ly}" x2="{left + 45}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + 52}" y="{ly}" dominant-baseline="middle" font-size="13">{escape(label)}</text>')
    out.append("</g>")
    return out


def render_curves(panels: Mapping[str, Sequence]) -> str:
    """SVG with one 800x600 panel per metric, side by side.

    ``panels`` maps a metric name to a list of ``(legend label, RejectCurve)``.
    Metrics appear in the canonical accuracy, precision, recall, f1 order.
    """
    keys = [m for m in METRICS if m in panels] + sorted(k for k in panels if k not in METRICS)
    width = PANEL_W * max(len(keys), 1)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">',
        f'<rect width="{width}" height="{PANEL_H}" fill="#fff"/>',
    ]
    for i, key in enumerate(keys):
        lines.extend(_panel(i * PANEL_W, TITLES.get(key, key), panels[key]))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
