"""Heliocentric clockwise maps.

The discipline sits at the center. The top-k publishers by output are placed
clockwise from 12 o'clock in descending citation average (ties by name),
equally spaced. Distance from the center grows with information gain, dot
area is proportional to the number of chapters, and the fill color marks the
gain quartile within the map.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import LayoutError
from .histograms import CitationHistogram
from .indicators import PublisherStats, top_publishers
from .infogain import InfoGainResult

RADIUS_SCALES = ("linear", "log")


@dataclass(frozen=True)
class MapConfig:
    k: int = 20
    r_min: float = 70.0
    r_max: float = 240.0
    max_dot_radius: float = 26.0
    radius_scale: str = "linear"
    n_bands: int = 4
    exclude: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.k < 1:
            raise LayoutError("k must be at least 1")
        if not 0 <= self.r_min <= self.r_max:
            raise LayoutError("need 0 <= r_min <= r_max")
        if self.radius_scale not in RADIUS_SCALES:
            raise LayoutError(f"radius_scale must be one of {RADIUS_SCALES}")
        if self.n_bands < 1:
            raise LayoutError("n_bands must be at least 1")

    @property
    def max_area(self) -> float:
        return math.pi * self.max_dot_radius ** 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["exclude"] = sorted(self.exclude)
        return d


@dataclass(frozen=True)
class HelioDot:
    label: str
    angle: float  # degrees clockwise from 12 o'clock
    radius: float
    area: float
    color_band: int
    gain: float
    citation_average: float
    nr_bc: int
    flagged_outlier: bool = False


@dataclass(frozen=True)
class HelioLayout:
    center: str
    dots: tuple[HelioDot, ...]
    legend: tuple[float, ...]  # gain thresholds between color bands
    config: dict = field(default_factory=dict)
    excluded: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps({
            "center": self.center,
            "dots": [asdict(d) for d in self.dots],
            "legend": list(self.legend),
            "excluded": list(self.excluded),
            "config": self.config,
        }, indent=2, sort_keys=True)


def _radii(gains: np.ndarray, cfg: MapConfig) -> np.ndarray:
    g_max = gains.max()
    span = cfg.r_max - cfg.r_min
    if g_max <= 0:
        return np.full(gains.shape, cfg.r_min)
    if cfg.radius_scale == "log":
        g_ref = gains[gains > 0].min()
        return cfg.r_min + span * np.log1p(gains / g_ref) / math.log1p(g_max / g_ref)
    return cfg.r_min + span * gains / g_max


def band_thresholds(gains: Sequence[float], n_bands: int = 4) -> np.ndarray:
    qs = np.linspace(0, 1, n_bands + 1)[1:-1]
    return np.quantile(np.asarray(gains, dtype=float), qs)


def layout_map(discipline_hist: CitationHistogram, stats: Sequence[PublisherStats],
               gains: Sequence[InfoGainResult], config: MapConfig = MapConfig(),
               flagged: Sequence[str] = ()) -> HelioLayout:
    """Place the top-k publishers of a discipline around its center.

    Publishers listed in ``config.exclude`` are removed before the top-k
    cut. ``flagged`` only marks dots; it never removes them.
    """
    if not stats:
        raise LayoutError("no publishers to map")
    gain_of = {g.label: g.gain for g in gains}
    candidates = [s for s in stats if s.publisher not in config.exclude]
    if not candidates:
        raise LayoutError("every publisher is excluded")
    top, _ = top_publishers(candidates, config.k)
    for s in top:
        if s.publisher not in gain_of:
            raise LayoutError(f"no information gain for publisher {s.publisher!r}")
    ordered = sorted(top, key=lambda s: (-s.citation_average, s.publisher))

    g = np.array([gain_of[s.publisher] for s in ordered], dtype=float)
    radii = _radii(g, config)
    thresholds = band_thresholds(g, config.n_bands)
    bands = np.searchsorted(thresholds, g, side="left")
    max_nr = max(s.nr_bc for s in ordered)
    m = len(ordered)
    flagged = set(flagged)
    dots = tuple(
        HelioDot(
            label=s.publisher,
            angle=360.0 * j / m,
            radius=float(radii[j]),
            area=config.max_area * s.nr_bc / max_nr,
            color_band=int(bands[j]),
            gain=float(g[j]),
            citation_average=s.citation_average,
            nr_bc=s.nr_bc,
            flagged_outlier=s.publisher in flagged,
        )
        for j, s in enumerate(ordered)
    )
    excluded = tuple(sorted(config.exclude & {s.publisher for s in stats}))
    return HelioLayout(discipline_hist.label, dots, tuple(float(t) for t in thresholds),
                       config.to_dict(), excluded)


def flag_outliers(stats: Sequence[PublisherStats], gains: Sequence[InfoGainResult],
                  discipline_hist: CitationHistogram, gain_factor: float = 5.0,
                  tail_probability: float = 0.01,
                  tail_quantile: float = 0.99) -> list[tuple[str, tuple[str, ...]]]:
    """Publishers that look like serials rather than book publishers.

    Two independent rules:

    * ``serial-identifiers``: most of the publisher's records carry an ISSN
      but no ISBN.
    * ``heavy-tail``: its gain exceeds ``gain_factor`` times the median gain
      and it puts at least ``tail_probability`` of its mass above the
      discipline's ``tail_quantile`` citation bin.

    Flags are advisory; nothing is removed here.
    """
    gain_of = {g.label: g.gain for g in gains}
    median = float(np.median(list(gain_of.values()))) if gain_of else 0.0
    q_edge = discipline_hist.quantile_edge(tail_quantile)
    out = []
    for s in stats:
        reasons = []
        if 2 * s.serial_like > s.nr_bc:
            reasons.append("serial-identifiers")
        g = gain_of.get(s.publisher)
        if (g is not None and g > gain_factor * median
                and s.histogram.mass_above(q_edge) >= tail_probability):
            reasons.append("heavy-tail")
        if reasons:
            out.append((s.publisher, tuple(reasons)))
    return out


# -- rendering -------------------------------------------------------------

@dataclass(frozen=True)
class SvgStyle:
    size: int = 640  # height of the canvas; the legend adds width on the right
    legend_width: int = 220
    palette: tuple[str, ...] = ("#1a9850", "#91cf60", "#fc8d59", "#d73027")
    center_color: str = "#f2b01e"
    center_radius: float = 14.0
    font_family: str = "Helvetica, Arial, sans-serif"
    font_size: int = 11
    show_labels: bool = True


def _f(x: float) -> str:
    return f"{round(float(x), 3) + 0.0:.3f}"


def polar_to_xy(angle: float, radius: float, cx: float, cy: float) -> tuple[float, float]:
    """Screen coordinates for an angle measured clockwise from vertical."""
    t = math.radians(angle)
    return cx + radius * math.sin(t), cy - radius * math.cos(t)


def render_svg(layout: HelioLayout, style: SvgStyle = SvgStyle()) -> str:
    """Standalone SVG document; identical inputs give identical text."""
    if not layout.dots:
        raise LayoutError("layout has no dots to draw")
    w, h = style.size + style.legend_width, style.size
    cx = cy = style.size / 2
    palette = style.palette
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="{escape(style.font_family)}" '
        f'font-size="{style.font_size}">',
        f'<title>{escape(layout.center)}</title>',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    r_min = layout.config.get("r_min")
    r_max = layout.config.get("r_max")
    for r in (r_min, r_max):
        if r:
            out.append(f'<circle class="guide" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" '
                       'fill="none" stroke="#cccccc" stroke-dasharray="4 4"/>')
    out.append(f'<line class="guide" x1="{_f(cx)}" y1="{_f(cy)}" x2="{_f(cx)}" y2="{_f(6)}" '
               'stroke="#cccccc"/>')
    out.append(f'<circle class="center" cx="{_f(cx)}" cy="{_f(cy)}" '
               f'r="{_f(style.center_radius)}" fill="{style.center_color}"/>')
    out.append(f'<text class="center-label" x="{_f(cx)}" y="{_f(cy + style.center_radius + 12)}" '
               f'text-anchor="middle" font-weight="bold">{escape(layout.center)}</text>')

    for d in layout.dots:
        x, y = polar_to_xy(d.angle, d.radius, cx, cy)
        r = math.sqrt(d.area / math.pi)
        color = palette[min(d.color_band, len(palette) - 1)]
        stroke = ' stroke="#000000" stroke-width="1.5"' if d.flagged_outlier else ""
        out.append(f'<circle class="dot" cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" '
                   f'fill="{color}" fill-opacity="0.85"{stroke}>'
                   f'<title>{escape(d.label)}: gain {d.gain:.4f}, average '
                   f'{d.citation_average:.2f}, {d.nr_bc} chapters</title></circle>')
        if style.show_labels:
            lx, ly = polar_to_xy(d.angle, d.radius + r + 8, cx, cy)
            s = math.sin(math.radians(d.angle))
            anchor = "start" if s > 0.2 else "end" if s < -0.2 else "middle"
            out.append(f'<text class="dot-label" x="{_f(lx)}" y="{_f(ly + 4)}" '
                       f'text-anchor="{anchor}">{escape(d.label)}</text>')

    lx = style.size + 10
    out.append(f'<text class="legend" x="{lx}" y="24" font-weight="bold">Information gain</text>')
    edges = [min(d.gain for d in layout.dots), *layout.legend, max(d.gain for d in layout.dots)]
    for b in range(len(edges) - 1):
        y = 36 + 22 * b
        color = palette[min(b, len(palette) - 1)]
        out.append(f'<rect class="legend" x="{lx}" y="{y}" width="14" height="14" '
                   f'fill="{color}"/>')
        out.append(f'<text class="legend" x="{lx + 20}" y="{y + 11}">'
                   f'{edges[b]:.4f} - {edges[b + 1]:.4f}</text>')
    max_dot = max(layout.dots, key=lambda d: d.area)
    y0 = 60 + 22 * (len(edges) - 1)
    out.append(f'<text class="legend" x="{lx}" y="{y0}" font-weight="bold">Chapters</text>')
    y = y0 + 12
    for frac in (1.0, 0.25):
        r = math.sqrt(max_dot.area * frac / math.pi)
        out.append(f'<circle class="legend-size" cx="{_f(lx + 30)}" '
                   f'cy="{_f(y + r)}" r="{_f(r)}" fill="none" stroke="#555555"/>')
        out.append(f'<text class="legend" x="{lx + 66}" y="{_f(y + r + 4)}">'
                   f'{round(max_dot.nr_bc * frac)}</text>')
        y += 2 * r + 10
    out.append("</svg>")
    return "\n".join(out) + "\n"
