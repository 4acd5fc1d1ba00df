"""SVG rendering: structure, bands, and byte determinism."""

from __future__ import annotations

import re

import numpy as np
import pytest

from demospeedup.entropy import EntropySeries
from demospeedup.segmenter import PrecisionLabeling
from demospeedup.svgplot import (
    CASUAL_FILL,
    PRECISION_FILL,
    plot_file_name,
    render_entropy_svg,
    write_entropy_svg,
)


def _series(n: int) -> EntropySeries:
    rng = np.random.default_rng(0)
    return EntropySeries("x", rng.normal(size=n))


def test_polyline_has_one_point_per_frame():
    svg = render_entropy_svg(_series(200), PrecisionLabeling("x", 200, ()))
    polylines = re.findall(r'<polyline points="([^"]+)"', svg)
    assert len(polylines) == 1
    assert len(polylines[0].split()) == 200


def test_all_casual_is_a_single_full_width_band():
    svg = render_entropy_svg(_series(50), PrecisionLabeling("x", 50, ()))
    assert PRECISION_FILL not in svg
    bands = re.findall(rf'<rect x="([\d.]+)" y="\d+" width="([\d.]+)"[^/]*fill="{CASUAL_FILL}"', svg)
    assert len(bands) == 1
    x, width = map(float, bands[0])
    assert x == pytest.approx(56.0)  # left margin
    assert width == pytest.approx(960.0 - 56.0 - 16.0)  # full plot width


def test_band_count_follows_runs():
    labeling = PrecisionLabeling("x", 60, ((10, 20), (40, 50)))
    svg = render_entropy_svg(_series(60), labeling)
    assert svg.count(PRECISION_FILL) == 2
    assert svg.count(CASUAL_FILL) == 3


def test_identical_inputs_render_identical_bytes():
    series = _series(37)
    labeling = PrecisionLabeling("x", 37, ((5, 12),))
    assert render_entropy_svg(series, labeling) == render_entropy_svg(series, labeling)


def test_constant_series_still_renders():
    series = EntropySeries("x", np.zeros(10))
    svg = render_entropy_svg(series, PrecisionLabeling("x", 10, ()))
    assert "<polyline" in svg and "NaN" not in svg


def test_frame_mismatch_rejected():
    with pytest.raises(ValueError, match="frames"):
        render_entropy_svg(_series(10), PrecisionLabeling("x", 11, ()))


def test_write_svg_file(tmp_path):
    path = tmp_path / plot_file_name(0)
    write_entropy_svg(_series(5), PrecisionLabeling("x", 5, ()), path)
    text = path.read_text()
    assert text.startswith("<svg ") and text.rstrip().endswith("</svg>")
    assert plot_file_name(3) == "entropy_3.svg"
