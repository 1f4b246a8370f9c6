"""End-to-end run: corpus -> per-discipline artifacts + manifest."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

from .errors import CitemapError, ConfigError
from .heliomap import HelioLayout, MapConfig, SvgStyle, flag_outliers, layout_map, render_svg
from .histograms import BinningSpec, CitationHistogram, build_histogram, histogram_csv
from .indicators import (IndicatorSet, PublisherStats, compute_indicators, publisher_stats,
                         scope_records, top_publishers)
from .infogain import InfoGainResult, SmoothingPolicy, rank_by_gain, ranking_csv
from .ingest import (CitationRecord, Corpus, Discipline, load_alias_table, load_category_map,
                     load_corpus)
from .lotka import LotkaFit, ReportRow, fit_lotka, fit_report

ARTIFACTS = (
    "indicators.json",
    "histogram.csv",
    "publisher_histograms.csv",
    "gain_ranking.csv",
    "lotka.json",
    "layout.json",
    "map.svg",
)
LOG_BASES = {"e": 1.0, "2": 1 / math.log(2), "10": 1 / math.log(10)}


@dataclass
class RunConfig:
    records: list[str] = field(default_factory=list)
    aliases: str | None = None
    categories: str | None = None
    disciplines: list[str] | None = None  # None: every discipline present
    output_dir: str = "citemap-out"
    k: int = 20
    gain_scale: float = 1.0
    log_base: str = "e"
    smoothing: str = SmoothingPolicy.ADDITIVE.value
    bin_width: int = 1
    max_bin: int | None = None
    include_overflow: bool = False
    stddev_ddof: int = 0
    lotka_method: str = "wls"
    lotka_min_count: int = 1
    radius_scale: str = "linear"
    exclude: list[str] = field(default_factory=list)
    outlier_gain_factor: float = 5.0
    jobs: int = 1
    seed: int | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if isinstance(cfg.records, str):
            cfg.records = [cfg.records]
        return cfg

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        if not self.records:
            raise ConfigError("no record files given")
        for p in [*self.records, self.aliases, self.categories]:
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"file not found: {p}")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.gain_scale < 0:
            raise ConfigError("gain scale must be non-negative")
        if self.log_base not in LOG_BASES:
            raise ConfigError(f"log base must be one of {sorted(LOG_BASES)}")
        try:
            SmoothingPolicy(self.smoothing)
            self.binning
            self.map_config
            for d in self.disciplines or ():
                Discipline.parse(d)
        except (ValueError, CitemapError) as exc:
            raise ConfigError(str(exc)) from None
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")

    @property
    def binning(self) -> BinningSpec:
        return BinningSpec(self.bin_width, self.max_bin, self.include_overflow)

    @property
    def map_config(self) -> MapConfig:
        return MapConfig(k=self.k, radius_scale=self.radius_scale,
                         exclude=frozenset(self.exclude))

    @property
    def effective_scale(self) -> float:
        """Gain multiplier including the log-base conversion."""
        return self.gain_scale * LOG_BASES[self.log_base]


def load_inputs(cfg: RunConfig) -> Corpus:
    aliases = load_alias_table(cfg.aliases) if cfg.aliases else None
    cmap = load_category_map(cfg.categories) if cfg.categories else None
    return load_corpus(cfg.records, aliases, cmap)


@dataclass
class DisciplineResult:
    discipline: Discipline
    indicators: IndicatorSet
    histogram: CitationHistogram
    stats: list[PublisherStats]
    ranked: list[PublisherStats]
    gains: list[InfoGainResult]
    gain_failures: dict[str, str]
    fit: LotkaFit
    report: list[ReportRow]
    flags: list[tuple[str, tuple[str, ...]]]
    layout: HelioLayout
    svg: str


def analyze_discipline(records: Sequence[CitationRecord], discipline: Discipline,
                       cfg: RunConfig) -> DisciplineResult:
    """Every per-discipline artifact, computed without touching the filesystem.

    The ranking covers the top-k publishers left after exclusion plus any
    excluded publisher of the discipline (marked in the export).
    """
    ind = compute_indicators(records, discipline, ddof=cfg.stddev_ddof, top_k=cfg.k)
    stats = publisher_stats(records, discipline, cfg.binning)
    cites = [r.citations for r in scope_records(records, discipline)]
    hist = build_histogram(cites, cfg.binning, label=discipline.label)

    excluded = set(cfg.exclude)
    top, _ = top_publishers([s for s in stats if s.publisher not in excluded], cfg.k)
    ranked = top + [s for s in stats if s.publisher in excluded]
    gains, failures = rank_by_gain(hist, [(s.publisher, s.histogram) for s in ranked],
                                   cfg.effective_scale, cfg.smoothing)
    flags = flag_outliers(ranked, gains, hist, gain_factor=cfg.outlier_gain_factor)
    fit = fit_lotka(hist, cfg.lotka_method, cfg.lotka_min_count)
    report = fit_report(hist, fit, cfg.lotka_min_count)
    layout = layout_map(hist, stats, gains, cfg.map_config, flagged=[f for f, _ in flags])
    return DisciplineResult(discipline, ind, hist, stats, ranked, gains, failures, fit,
                            report, flags, layout, render_svg(layout))


def _artifact_texts(res: DisciplineResult, excluded: set[str]) -> dict[str, str]:
    by_label = {s.publisher: s for s in res.ranked}
    lotka = {"fit": asdict(res.fit), "report": [asdict(r) for r in res.report]}
    return {
        "indicators.json": json.dumps(
            {"discipline": res.discipline.label, **res.indicators.to_dict()},
            indent=2, sort_keys=True) + "\n",
        "histogram.csv": histogram_csv(res.histogram),
        "publisher_histograms.csv": histogram_csv([s.histogram for s in res.ranked],
                                                  with_label=True),
        "gain_ranking.csv": ranking_csv(res.gains, by_label, excluded),
        "lotka.json": json.dumps(lotka, indent=2, sort_keys=True) + "\n",
        "layout.json": res.layout.to_json() + "\n",
        "map.svg": res.svg,
    }


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def select_disciplines(records: Sequence[CitationRecord],
                       requested: Sequence[str] | None) -> list[Discipline]:
    if requested:
        return [Discipline.parse(d) for d in requested]
    present = set().union(*(r.disciplines for r in records)) if records else set()
    return [d for d in Discipline if d in present]


def run_pipeline(cfg: RunConfig) -> dict:
    """Run every stage and write artifacts under ``cfg.output_dir``.

    Returns the manifest. On a data error the files written so far are
    deleted, a manifest with status "failed" is left behind and the error is
    re-raised.
    """
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    manifest: dict = {"status": "failed", "config": asdict(cfg)}
    try:
        corpus = load_inputs(cfg)
        manifest["diagnostics"] = [str(d) for d in corpus.diagnostics]
        manifest["unmapped_records"] = len(corpus.unmapped)
        disciplines = select_disciplines(corpus.records, cfg.disciplines)
        if not disciplines:
            raise CitemapError("no discipline has any records")

        def work(d):
            return analyze_discipline(corpus.records, d, cfg)

        if cfg.jobs > 1:
            with ThreadPoolExecutor(cfg.jobs) as pool:
                results = list(pool.map(work, disciplines))
        else:
            results = [work(d) for d in disciplines]

        outputs = []
        for res in results:
            sub = out / res.discipline.value
            sub.mkdir(exist_ok=True)
            for name, text in _artifact_texts(res, set(cfg.exclude)).items():
                path = sub / name
                path.write_text(text, encoding="utf-8", newline="")
                written.append(path)
                outputs.append({"path": f"{res.discipline.value}/{name}",
                                "sha256": sha256_file(path)})
        manifest["outputs"] = outputs
        manifest["outlier_flags"] = {
            res.discipline.value: {label: list(reasons) for label, reasons in res.flags}
            for res in results}
        manifest["gain_failures"] = {res.discipline.value: res.gain_failures
                                     for res in results}
        manifest["status"] = "complete"
        return manifest
    except CitemapError as exc:
        for p in written:
            p.unlink(missing_ok=True)
        manifest["error"] = str(exc)
        raise
    finally:
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
