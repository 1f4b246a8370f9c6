"""Command-line entry point.

Exit status: 0 on success, 1 on data errors, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .errors import CitemapError, ConfigError
from .heliomap import render_svg
from .histograms import build_histogram, histogram_csv
from .indicators import ALL, compute_indicators, group_by_year, indicators_table, publisher_stats
from .infogain import SmoothingPolicy, ranking_csv
from .ingest import Discipline, serialize_records
from .lotka import METHODS, fit_lotka, fit_report, report_csv
from .pipeline import LOG_BASES, RunConfig, analyze_discipline, load_inputs, run_pipeline
from .synth import generate, load_spec


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _add_inputs(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--records", nargs="+", required=required, metavar="FILE",
                   help="record files (.csv, or .jsonl for one JSON object per line)")
    p.add_argument("--aliases", metavar="FILE", help="raw_name,canonical_name table")
    p.add_argument("--categories", metavar="FILE",
                   help="category,disciplines table (codes AH SCI SOC ET, ';'-separated)")


def _add_binning(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin-width", type=int, default=1)
    p.add_argument("--max-bin", type=int)
    p.add_argument("--overflow", action="store_true", help="keep counts >= max-bin in one bin")


def _add_gain(p: argparse.ArgumentParser) -> None:
    p.add_argument("-k", type=int, default=20, help="publishers kept (default 20)")
    p.add_argument("--scale", type=float, default=1.0, help="multiplier a of the gain")
    p.add_argument("--log-base", choices=sorted(LOG_BASES), default="e")
    p.add_argument("--smoothing", choices=[s.value for s in SmoothingPolicy],
                   default=SmoothingPolicy.ADDITIVE.value)
    p.add_argument("--exclude", action="append", default=[], metavar="PUBLISHER",
                   help="canonical publisher name to leave off the map (repeatable)")


def _config(args, **extra) -> RunConfig:
    cfg = RunConfig(records=list(args.records), aliases=args.aliases,
                    categories=args.categories)
    for name, attr in (("bin_width", "bin_width"), ("max_bin", "max_bin"),
                       ("overflow", "include_overflow"), ("k", "k"), ("scale", "gain_scale"),
                       ("log_base", "log_base"), ("smoothing", "smoothing"),
                       ("exclude", "exclude"), ("method", "lotka_method"),
                       ("min_count", "lotka_min_count"), ("radius_scale", "radius_scale"),
                       ("ddof", "stddev_ddof")):
        if getattr(args, name, None) is not None:
            setattr(cfg, attr, getattr(args, name))
    for k, v in extra.items():
        setattr(cfg, k, v)
    cfg.validate()
    return cfg


def _discipline(text: str) -> Discipline:
    try:
        return Discipline.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_ingest_check(args) -> int:
    cfg = _config(args)
    corpus = load_inputs(cfg)
    print(f"records: {len(corpus.records)}")
    for d in Discipline:
        print(f"  {d.label}: {len(corpus.in_discipline(d))}")
    print(f"  Unmapped: {len(corpus.unmapped)}")
    multi = sum(len(r.disciplines) > 1 for r in corpus.records)
    print(f"multi-discipline records: {multi}")
    unaliased = sorted({r.publisher for r in corpus.records if r.unaliased})
    print(f"publishers: {len({r.publisher for r in corpus.records})} "
          f"({len(unaliased)} without alias entry)")
    print(f"diagnostics: {len(corpus.diagnostics)}")
    for d in corpus.diagnostics:
        print(f"  {d}")
    return 1 if args.strict and corpus.diagnostics else 0


def cmd_indicators(args) -> int:
    cfg = _config(args)
    records = load_inputs(cfg).records
    if args.group_by == "year":
        scope = _discipline(args.discipline[0]) if args.discipline else ALL
        lines = ["year,nr_bc,total_citations"]
        lines += [f"{y},{n},{c}" for y, (n, c) in group_by_year(records, scope).items()]
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    if args.discipline:
        scopes = [_discipline(d) for d in args.discipline]
    else:
        scopes = [ALL] + [d for d in Discipline if any(d in r.disciplines for r in records)]
    columns = []
    for s in scopes:
        name = s if s == ALL else s.label
        columns.append((name, compute_indicators(records, s, ddof=cfg.stddev_ddof, top_k=cfg.k)))
    if args.format == "json":
        text = json.dumps({name: ind.to_dict() for name, ind in columns}, indent=2) + "\n"
    else:
        text = indicators_table(columns)
    _emit(text, args.out)
    return 0


def _scope_histogram(records, cfg, discipline: Discipline, publisher: str | None):
    if publisher is None:
        cites = [r.citations for r in records if discipline in r.disciplines]
        return build_histogram(cites, cfg.binning, label=discipline.label)
    for s in publisher_stats(records, discipline, cfg.binning):
        if s.publisher == publisher:
            return s.histogram
    raise CitemapError(f"publisher {publisher!r} has no records in {discipline.label}")


def cmd_histogram(args) -> int:
    cfg = _config(args)
    records = load_inputs(cfg).records
    hist = _scope_histogram(records, cfg, _discipline(args.discipline), args.publisher)
    _emit(histogram_csv(hist), args.out)
    return 0


def cmd_gain(args) -> int:
    cfg = _config(args)
    res = analyze_discipline(load_inputs(cfg).records, _discipline(args.discipline), cfg)
    by_label = {s.publisher: s for s in res.ranked}
    _emit(ranking_csv(res.gains, by_label, set(cfg.exclude)), args.out)
    for label, msg in res.gain_failures.items():
        print(f"warning: no gain for {label}: {msg}", file=sys.stderr)
    return 0


def cmd_lotka(args) -> int:
    cfg = _config(args)
    records = load_inputs(cfg).records
    hist = _scope_histogram(records, cfg, _discipline(args.discipline), args.publisher)
    fit = fit_lotka(hist, cfg.lotka_method, cfg.lotka_min_count)
    _emit(fit.to_json() + "\n", args.out)
    if args.report:
        _emit(report_csv(fit_report(hist, fit, cfg.lotka_min_count)), args.report)
    return 0


def cmd_map(args) -> int:
    cfg = _config(args)
    res = analyze_discipline(load_inputs(cfg).records, _discipline(args.discipline), cfg)
    for label, reasons in res.flags:
        print(f"outlier flag: {label} ({', '.join(reasons)})", file=sys.stderr)
    if args.layout:
        _emit(res.layout.to_json() + "\n", args.layout)
    _emit(render_svg(res.layout), args.svg)
    return 0


def cmd_pipeline(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.records:
        cfg.records = list(args.records)
    for name in ("aliases", "categories", "k", "jobs"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.out:
        cfg.output_dir = args.out
    if args.exclude:
        cfg.exclude = list(args.exclude)
    if args.discipline:
        cfg.disciplines = list(args.discipline)
    manifest = run_pipeline(cfg)
    for d, flags in manifest["outlier_flags"].items():
        for label, reasons in flags.items():
            print(f"outlier flag [{d}]: {label} ({', '.join(reasons)})", file=sys.stderr)
    print(f"wrote {len(manifest['outputs'])} files to {cfg.output_dir}")
    return 0


def cmd_synth(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    fmt = "jsonl" if args.out and Path(args.out).suffix in (".jsonl", ".ndjson") else "csv"
    _emit(serialize_records(generate(spec), fmt), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citemap",
        description="Citation histograms, information-gain rankings, Lotka fits and "
                    "heliocentric clockwise maps for book-chapter citation records.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="parse inputs and report diagnostics")
    _add_inputs(p)
    p.add_argument("--strict", action="store_true", help="exit 1 when any diagnostic is raised")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("indicators", help="indicator table per discipline")
    _add_inputs(p)
    p.add_argument("--discipline", action="append")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--ddof", type=int, choices=(0, 1), help="0 population (default), 1 sample")
    p.add_argument("-k", type=int, default=20)
    p.add_argument("--group-by", choices=("year",))
    p.add_argument("--out")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("histogram", help="citation histogram of a discipline or publisher")
    _add_inputs(p)
    _add_binning(p)
    p.add_argument("--discipline", required=True)
    p.add_argument("--publisher")
    p.add_argument("--out")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("gain", help="rank publishers by information gain")
    _add_inputs(p)
    _add_binning(p)
    _add_gain(p)
    p.add_argument("--discipline", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("lotka", help="fit Lotka's law to a histogram tail")
    _add_inputs(p)
    _add_binning(p)
    p.add_argument("--discipline", required=True)
    p.add_argument("--publisher")
    p.add_argument("--method", choices=METHODS, default="wls")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--out", help="fit JSON (default stdout)")
    p.add_argument("--report", metavar="FILE", help="write the per-bin report CSV here")
    p.set_defaults(func=cmd_lotka)

    p = sub.add_parser("map", help="lay out and render a heliocentric clockwise map")
    _add_inputs(p)
    _add_binning(p)
    _add_gain(p)
    p.add_argument("--discipline", required=True)
    p.add_argument("--radius-scale", choices=("linear", "log"))
    p.add_argument("--layout", metavar="FILE", help="write the layout JSON here")
    p.add_argument("--svg", metavar="FILE", help="SVG output (default stdout)")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("pipeline", help="run every stage and write a manifest")
    _add_inputs(p, required=False)
    p.add_argument("--config", help="JSON run config; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("-k", type=int, help="publishers per map (default 20)")
    p.add_argument("--jobs", type=int, help="disciplines analyzed in parallel")
    p.add_argument("--exclude", action="append", metavar="PUBLISHER",
                   help="keep off the map, still ranked (repeatable)")
    p.add_argument("--discipline", action="append", help="restrict to these (repeatable)")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("synth", help="generate a synthetic record file from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="record file (default stdout)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CitemapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
