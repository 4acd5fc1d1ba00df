"""Deterministic SVG rendering of an entropy curve with region bands.

The emitter is hand-rolled so that identical inputs give identical
bytes: fixed coordinate formatting, no timestamps, no generated ids.
"""

from __future__ import annotations

import math
from pathlib import Path

from ._fsio import atomic_write_text
from .entropy import EntropySeries
from .segmenter import PrecisionLabeling

WIDTH = 960
HEIGHT = 320
MARGIN_LEFT = 56
MARGIN_RIGHT = 16
MARGIN_TOP = 16
MARGIN_BOTTOM = 36

PRECISION_FILL = "#2e8b57"  # green: precision regions
CASUAL_FILL = "#cd5c5c"  # red: casualness regions


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def render_entropy_svg(series: EntropySeries, labeling: PrecisionLabeling) -> str:
    if series.n_frames != labeling.n_frames:
        raise ValueError(
            f"entropy has {series.n_frames} frames but labeling has {labeling.n_frames}"
        )
    n = series.n_frames
    values = series.values
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    vmin, vmax = float(values.min()), float(values.max())
    if vmin == vmax:
        vmin, vmax = vmin - 1.0, vmax + 1.0
    pad = 0.05 * (vmax - vmin)
    vmin, vmax = vmin - pad, vmax + pad

    # frame coordinate f in [0.5, n+0.5] spans the plot area
    def x_at(frame: float) -> float:
        return MARGIN_LEFT + (frame - 0.5) / n * plot_w

    def y_at(value: float) -> float:
        return MARGIN_TOP + (vmax - value) / (vmax - vmin) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    bands = [(run, PRECISION_FILL) for run in labeling.precision_runs]
    bands += [(run, CASUAL_FILL) for run in labeling.casual_runs()]
    for (start, stop), fill in sorted(bands):
        x0 = x_at(start - 0.5)
        x1 = x_at(stop - 0.5)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{MARGIN_TOP}" width="{_fmt(x1 - x0)}" '
            f'height="{plot_h}" fill="{fill}" fill-opacity="0.25"/>'
        )

    tick_step = math.ceil(n / 10)
    ticks = sorted({1, *range(tick_step, n + 1, tick_step)})
    axis_y = MARGIN_TOP + plot_h
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{axis_y}" x2="{MARGIN_LEFT + plot_w}" y2="{axis_y}" '
        f'stroke="#333333" stroke-width="1"/>'
    )
    for t in ticks:
        x = x_at(float(t))
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{axis_y}" x2="{_fmt(x)}" y2="{axis_y + 5}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{axis_y + 18}" font-family="monospace" font-size="11" '
            f'fill="#333333" text-anchor="middle">{t}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        value = vmin + frac * (vmax - vmin)
        y = y_at(value)
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{_fmt(y + 4)}" font-family="monospace" '
            f'font-size="11" fill="#333333" text-anchor="end">{_fmt(value)}</text>'
        )

    coords = " ".join(f"{_fmt(x_at(float(t)))},{_fmt(y_at(float(v)))}" for t, v in enumerate(values, 1))
    parts.append(
        f'<polyline points="{coords}" fill="none" stroke="#1a1a2e" stroke-width="1.5"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_file_name(index: int) -> str:
    return f"entropy_{index}.svg"


def write_entropy_svg(series: EntropySeries, labeling: PrecisionLabeling, path: Path | str) -> None:
    atomic_write_text(Path(path), render_entropy_svg(series, labeling))
