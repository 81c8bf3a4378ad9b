"""Deterministic report emission: canonical JSON, CSV series, and SVG charts.

Payload bytes are a pure function of (config, seed): keys are sorted,
floats go through repr, and no timestamps enter any payload file (the run
manifest carries wall-clock data outside the hash-covered region).
"""

from __future__ import annotations

import hashlib
import json
from typing import Sequence


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def config_hash(doc: dict) -> str:
    return sha256_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def svg_line_chart(x_values, series: dict, title: str = "", xlabel: str = "",
                   ylabel: str = "", width: int = 640, height: int = 400) -> str:
    """Minimal polyline chart: axes, ticks, one polyline per labelled series.

    Direct markup emission; no plotting dependency.
    """
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    xs = [float(v) for v in x_values]
    all_y = [float(v) for ys in series.values() for v in ys]
    if not xs or not all_y:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10">'
                "</svg>\n")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + pw * (x - x0) / (x1 - x0)

    def py(y):
        return mt + ph * (1.0 - (y - y0) / (y1 - y0))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        parts.append(f'<text x="{width/2:.1f}" y="18" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    parts.append(f'<line x1="{ml}" y1="{mt+ph}" x2="{ml+pw}" y2="{mt+ph}" '
                 'stroke="black"/>')
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt+ph}" stroke="black"/>')
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = y0 + i * (y1 - y0) / 4
        parts.append(f'<line x1="{px(xv):.1f}" y1="{mt+ph}" x2="{px(xv):.1f}" '
                     f'y2="{mt+ph+4}" stroke="black"/>')
        parts.append(f'<text x="{px(xv):.1f}" y="{mt+ph+16}" text-anchor="middle" '
                     f'font-size="10">{xv:.4g}</text>')
        parts.append(f'<line x1="{ml-4}" y1="{py(yv):.1f}" x2="{ml}" '
                     f'y2="{py(yv):.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml-7}" y="{py(yv)+3:.1f}" text-anchor="end" '
                     f'font-size="10">{yv:.4g}</text>')
    if xlabel:
        parts.append(f'<text x="{ml+pw/2:.1f}" y="{height-8}" text-anchor="middle" '
                     f'font-size="12">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="14" y="{mt+ph/2:.1f}" text-anchor="middle" '
                     f'font-size="12" transform="rotate(-90 14 {mt+ph/2:.1f})">'
                     f'{ylabel}</text>')
    for idx, (label, ys) in enumerate(sorted(series.items())):
        color = palette[idx % len(palette)]
        pts = " ".join(f"{px(x):.2f},{py(float(y)):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        parts.append(f'<text x="{ml+pw-4}" y="{mt+14+14*idx}" text-anchor="end" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
