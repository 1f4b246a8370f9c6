"""Citation-pattern analysis of book chapters by publisher and discipline."""

from .errors import CitemapError, ConfigError
from .heliomap import HelioDot, HelioLayout, MapConfig, flag_outliers, layout_map, render_svg
from .histograms import BinningSpec, CitationHistogram, align_support, build_histogram
from .indicators import (IndicatorSet, PublisherStats, compute_indicators, publisher_stats,
                         top_publishers)
from .infogain import InfoGainResult, SmoothingPolicy, information_gain, rank_by_gain
from .ingest import (AliasTable, CategoryMap, CitationRecord, Discipline, assign_disciplines,
                     load_corpus, normalize_publisher, parse_records, serialize_records)
from .lotka import LotkaFit, fit_lotka, fit_report, lotka_predict
from .synth import SynthSpec, generate

__all__ = [
    "AliasTable", "BinningSpec", "CategoryMap", "CitationHistogram", "CitationRecord",
    "CitemapError", "ConfigError", "Discipline", "HelioDot", "HelioLayout", "IndicatorSet",
    "InfoGainResult", "LotkaFit", "MapConfig", "PublisherStats", "SmoothingPolicy",
    "SynthSpec", "align_support", "assign_disciplines", "build_histogram",
    "compute_indicators", "fit_lotka", "fit_report", "flag_outliers", "generate",
    "information_gain", "layout_map", "load_corpus", "lotka_predict", "normalize_publisher",
    "parse_records", "publisher_stats", "rank_by_gain", "render_svg", "serialize_records",
    "top_publishers",
]
