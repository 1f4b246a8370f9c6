"""Per-discipline indicator set and publisher-level summaries."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np

from .errors import EmptyScopeError
from .histograms import BinningSpec, CitationHistogram, build_histogram
from .ingest import CitationRecord, Discipline

ALL = "ALL"
Scope = Union[Discipline, str]


@dataclass(frozen=True)
class IndicatorSet:
    nr_bc: int
    pct_bc_of_total: float
    total_citations: int
    pct_citations_of_total: float
    citation_average: float
    citation_stddev: float
    nr_publishers: int
    pct_bc_top20: float
    max_citations: int
    pct_non_cited: float
    # distinct records in the whole corpus, the base of the two "% of total" fields
    corpus_records: int = 0
    corpus_citations: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PublisherStats:
    publisher: str
    nr_bc: int
    total_citations: int
    citation_average: float
    histogram: CitationHistogram
    serial_like: int = 0  # records with an ISSN and no ISBN


def _resolve_scope(discipline: Scope) -> Discipline | None:
    if isinstance(discipline, Discipline):
        return discipline
    if str(discipline).upper() == ALL:
        return None
    return Discipline.parse(discipline)


def scope_records(records: Sequence[CitationRecord], discipline: Scope) -> list[CitationRecord]:
    """Records counted in ``discipline`` (every record for ALL)."""
    d = _resolve_scope(discipline)
    if d is None:
        return list(records)
    return [r for r in records if d in r.disciplines]


def _scope_name(discipline: Scope) -> str:
    d = _resolve_scope(discipline)
    return ALL if d is None else d.label


def compute_indicators(records: Sequence[CitationRecord], discipline: Scope = ALL,
                       ddof: int = 0, top_k: int = 20) -> IndicatorSet:
    """Indicators for one discipline, with ``records`` being the whole corpus.

    A record in several disciplines counts fully in each. The two "% of
    total" fields are taken against the distinct corpus totals. ``ddof=0``
    gives the population standard deviation.
    """
    scoped = scope_records(records, discipline)
    if not scoped:
        raise EmptyScopeError(f"no records in scope {_scope_name(discipline)}")
    cites = np.array([r.citations for r in scoped], dtype=np.int64)
    n = len(scoped)
    total = int(cites.sum())
    corpus_n = len(records)
    corpus_c = sum(r.citations for r in records)
    stats = publisher_stats(records, discipline)
    _, coverage = top_publishers(stats, top_k)
    return IndicatorSet(
        nr_bc=n,
        pct_bc_of_total=100.0 * n / corpus_n,
        total_citations=total,
        pct_citations_of_total=100.0 * total / corpus_c if corpus_c else 0.0,
        citation_average=total / n,
        citation_stddev=float(np.std(cites, ddof=ddof)) if n > ddof else 0.0,
        nr_publishers=len(stats),
        pct_bc_top20=coverage,
        max_citations=int(cites.max()),
        pct_non_cited=100.0 * int((cites == 0).sum()) / n,
        corpus_records=corpus_n,
        corpus_citations=corpus_c,
    )


def publisher_stats(records: Sequence[CitationRecord], discipline: Scope = ALL,
                    binning: BinningSpec = BinningSpec()) -> list[PublisherStats]:
    """One entry per publisher in scope, largest first, ties alphabetical."""
    scoped = scope_records(records, discipline)
    if not scoped:
        raise EmptyScopeError(f"no records in scope {_scope_name(discipline)}")
    groups: dict[str, list[CitationRecord]] = defaultdict(list)
    for r in scoped:
        groups[r.publisher].append(r)
    out = []
    for name, recs in groups.items():
        cites = [r.citations for r in recs]
        total = sum(cites)
        out.append(PublisherStats(
            publisher=name,
            nr_bc=len(recs),
            total_citations=total,
            citation_average=total / len(recs),
            histogram=build_histogram(cites, binning, label=name),
            serial_like=sum(r.serial_like for r in recs),
        ))
    out.sort(key=lambda s: (-s.nr_bc, s.publisher))
    return out


def top_publishers(stats: Sequence[PublisherStats],
                   k: int = 20) -> tuple[list[PublisherStats], float]:
    """The ``k`` largest publishers and the share of chapters they hold (percent)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    ordered = sorted(stats, key=lambda s: (-s.nr_bc, s.publisher))
    top = ordered[:k]
    total = sum(s.nr_bc for s in ordered)
    coverage = 100.0 * sum(s.nr_bc for s in top) / total if total else 0.0
    return top, coverage


def group_by_year(records: Sequence[CitationRecord],
                  discipline: Scope = ALL) -> dict[int, tuple[int, int]]:
    """year -> (chapters, citations) for the scope."""
    out: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for r in scope_records(records, discipline):
        out[r.year][0] += 1
        out[r.year][1] += r.citations
    return {y: (v[0], v[1]) for y, v in sorted(out.items())}


_TABLE_ROWS = [
    ("Nr BC", "nr_bc", "{:d}"),
    ("% BC From the total Database", "pct_bc_of_total", "{:.0f}%"),
    ("Total Citations", "total_citations", "{:d}"),
    ("% Citations From the total Database", "pct_citations_of_total", "{:.0f}%"),
    ("Citation Average", "citation_average", "{:.2f}"),
    ("Citation Average Standard Deviation", "citation_stddev", "{:.2f}"),
    ("Nr Academic Publishers", "nr_publishers", "{:d}"),
    ("% BC - Top20 Publishers", "pct_bc_top20", "{:.0f}%"),
    ("Nr of citation most cited BC", "max_citations", "{:d}"),
    ("% of Non-Cited BC", "pct_non_cited", "{:.0f}%"),
]


def indicators_table(columns: Sequence[tuple[str, IndicatorSet]]) -> str:
    """Delimited table with indicators as rows and scopes as columns, display-rounded."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["INDICATORS"] + [name for name, _ in columns])
    for title, attr, fmt in _TABLE_ROWS:
        writer.writerow([title] + [fmt.format(getattr(ind, attr)) for _, ind in columns])
    return buf.getvalue()
