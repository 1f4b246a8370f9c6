import re

import pytest
from hypothesis import given, settings, strategies as st

from citemap.errors import LayoutError
from citemap.heliomap import (HelioDot, HelioLayout, MapConfig, flag_outliers, layout_map,
                              polar_to_xy, render_svg)
from citemap.histograms import CitationHistogram, build_histogram
from citemap.indicators import PublisherStats
from citemap.infogain import InfoGainResult, information_gain

DISC = build_histogram([0] * 80 + [1] * 12 + [2] * 5 + [3] * 3, label="Science")


def stat(name, nr_bc, average, hist=None, serial_like=0):
    hist = hist or CitationHistogram((1,), label=name)
    return PublisherStats(name, nr_bc, round(average * nr_bc), average, hist, serial_like)


def gain(name, value):
    return InfoGainResult(value, value, 0.0, 1.0, False, "Science", name)


def test_three_publishers():
    stats = [stat("P1", 10, 3.0), stat("P2", 20, 2.0), stat("P3", 40, 1.0)]
    gains = [gain("P1", 0.1), gain("P2", 0.2), gain("P3", 0.4)]
    cfg = MapConfig(r_min=50, r_max=250)
    layout = layout_map(DISC, stats, gains, cfg)
    assert [d.label for d in layout.dots] == ["P1", "P2", "P3"]
    assert [d.angle for d in layout.dots] == [0.0, 120.0, 240.0]
    assert [d.radius for d in layout.dots] == pytest.approx([100.0, 150.0, 250.0])
    assert layout.dots[2].area == pytest.approx(cfg.max_area)
    assert layout.dots[0].area / layout.dots[2].area == pytest.approx(0.25, abs=1e-12)
    assert layout.center == "Science"


def test_single_publisher_sits_on_outer_ring():
    cfg = MapConfig(r_min=10, r_max=90)
    layout = layout_map(DISC, [stat("Only", 5, 1.0)], [gain("Only", 0.3)], cfg)
    (dot,) = layout.dots
    assert dot.angle == 0.0 and dot.radius == 90.0


def test_all_zero_gains_at_inner_ring():
    layout = layout_map(DISC, [stat("A", 5, 1.0), stat("B", 5, 2.0)],
                        [gain("A", 0.0), gain("B", 0.0)], MapConfig(r_min=10, r_max=90))
    assert [d.radius for d in layout.dots] == [10.0, 10.0]


def test_ties_in_average_alphabetical():
    stats = [stat("Zed", 5, 1.0), stat("Abe", 5, 1.0), stat("Top", 5, 2.0)]
    layout = layout_map(DISC, stats, [gain(s.publisher, 0.1) for s in stats])
    assert [d.label for d in layout.dots] == ["Top", "Abe", "Zed"]


def test_top_k_and_exclusion():
    stats = [stat(f"P{i:02d}", 100 - i, i / 10) for i in range(25)]
    gains = [gain(s.publisher, 0.01 * (i + 1)) for i, s in enumerate(stats)]
    layout = layout_map(DISC, stats, gains)
    assert len(layout.dots) == 20
    assert {d.label for d in layout.dots} == {f"P{i:02d}" for i in range(20)}
    layout = layout_map(DISC, stats, gains, MapConfig(exclude=frozenset({"P00"})))
    labels = {d.label for d in layout.dots}
    assert "P00" not in labels and "P20" in labels
    assert layout.excluded == ("P00",)


def test_layout_errors():
    with pytest.raises(LayoutError):
        layout_map(DISC, [], [])
    with pytest.raises(LayoutError, match="Lonely"):
        layout_map(DISC, [stat("Lonely", 3, 1.0)], [])
    with pytest.raises(LayoutError):
        MapConfig(k=0)


def test_log_radius_monotone():
    stats = [stat(n, 5, a) for n, a in (("A", 3), ("B", 2), ("C", 1))]
    gains = [gain("A", 0.001), gain("B", 0.01), gain("C", 1.0)]
    layout = layout_map(DISC, stats, gains, MapConfig(radius_scale="log"))
    radii = [d.radius for d in layout.dots]
    assert radii == sorted(radii) and radii[-1] == pytest.approx(240.0)


def test_color_bands_are_quartiles():
    stats = [stat(f"P{i}", 10, 10 - i) for i in range(8)]
    gains = [gain(f"P{i}", float(i)) for i in range(8)]
    layout = layout_map(DISC, stats, gains)
    assert [d.color_band for d in layout.dots] == [0, 0, 1, 1, 2, 2, 3, 3]
    assert len(layout.legend) == 3


def _three_dot_layout():
    stats = [stat("P1", 10, 3.0), stat("P2", 20, 2.0), stat("P3 & Sons", 40, 1.0)]
    return layout_map(DISC, stats, [gain("P1", 0.1), gain("P2", 0.2), gain("P3 & Sons", 0.4)])


def test_svg_structure():
    svg = render_svg(_three_dot_layout())
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert len(re.findall(r'<circle class="dot"', svg)) == 3
    assert len(re.findall(r'<circle class="center"', svg)) == 1
    assert "P3 &amp; Sons" in svg
    assert svg.rstrip().endswith("</svg>")


def test_svg_deterministic():
    layout = _three_dot_layout()
    assert render_svg(layout) == render_svg(layout)
    assert render_svg(layout).encode() == render_svg(_three_dot_layout()).encode()


def test_svg_quarter_turn_is_three_oclock():
    dot = HelioDot("East", 90.0, 100.0, 200.0, 0, 0.1, 1.0, 10)
    svg = render_svg(HelioLayout("D", (dot,), ()))
    m = re.search(r'<circle class="dot" cx="([\d.]+)" cy="([\d.]+)"', svg)
    assert (float(m.group(1)), float(m.group(2))) == (320.0 + 100.0, 320.0)
    x, y = polar_to_xy(180.0, 50.0, 0.0, 0.0)
    assert (round(x, 12), round(y, 12)) == (0.0, 50.0)


def test_svg_needs_dots():
    with pytest.raises(LayoutError):
        render_svg(HelioLayout("D", (), ()))


def test_flag_serial_identifiers():
    stats = [stat("Annual Reviews", 10, 5.0, serial_like=10), stat("Brill", 10, 0.1)]
    flags = dict(flag_outliers(stats, [gain("Annual Reviews", 0.1), gain("Brill", 0.1)], DISC))
    assert flags == {"Annual Reviews": ("serial-identifiers",)}


def test_flag_heavy_tail():
    common = build_histogram([0] * 80 + [1] * 12 + [2] * 5 + [3] * 3)
    heavy = build_histogram([0] * 30 + [5] * 20 + [20] * 30 + [48] * 20, label="AR")
    stats = [stat(f"N{i}", 100, 0.3, common) for i in range(4)] + [stat("AR", 100, 20, heavy)]
    gains = [information_gain(DISC, s.histogram.with_label(s.publisher)) for s in stats]
    flags = dict(flag_outliers(stats, gains, DISC))
    assert flags == {"AR": ("heavy-tail",)}


def test_identical_publisher_never_flagged():
    s = stat("Twin", 100, 0.31, DISC)
    g = information_gain(DISC, DISC.with_label("Twin"))
    assert g.gain == 0
    assert flag_outliers([s], [g], DISC) == []


@st.composite
def map_inputs(draw):
    m = draw(st.integers(3, 20))
    names = [f"Pub{i:02d}" for i in range(m)]
    stats, gains = [], []
    for name in names:
        nr = draw(st.integers(1, 50_000))
        avg = draw(st.floats(0, 10, allow_nan=False))
        stats.append(stat(name, nr, avg))
        gains.append(gain(name, draw(st.floats(0, 5, allow_nan=False))))
    return stats, gains


@settings(max_examples=200)
@given(map_inputs())
def test_layout_invariants(inputs):
    stats, gains = inputs
    layout = layout_map(DISC, stats, gains)
    dots = layout.dots
    assert len(dots) == len(stats) and len({d.angle for d in dots}) == len(dots)
    for a, b in zip(dots, dots[1:]):
        assert a.angle < b.angle
        assert a.citation_average >= b.citation_average
    for a in dots:
        for b in dots:
            if a.gain < b.gain:
                assert a.radius <= b.radius
            assert abs(a.area / b.area - a.nr_bc / b.nr_bc) <= 1e-9 * (a.nr_bc / b.nr_bc)
    assert all(0 <= d.angle < 360 for d in dots)
    assert render_svg(layout) == render_svg(layout)


@given(map_inputs(), st.data())
def test_exclusion_keeps_relative_order(inputs, data):
    stats, gains = inputs
    drop = data.draw(st.sampled_from([s.publisher for s in stats]))
    before = [d.label for d in layout_map(DISC, stats, gains).dots if d.label != drop]
    after = [d.label for d in
             layout_map(DISC, stats, gains, MapConfig(exclude=frozenset({drop}))).dots]
    assert after == before
