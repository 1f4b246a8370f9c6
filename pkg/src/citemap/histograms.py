"""Citation-count histograms over bins [l, l + width).

Histograms keep integer bin counts and derive probabilities on demand, so
padding or re-gridding never accumulates renormalization error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import HistogramError


@dataclass(frozen=True)
class BinningSpec:
    bin_width: int = 1
    max_bin: int | None = None
    include_overflow: bool = False

    def __post_init__(self):
        if int(self.bin_width) != self.bin_width or self.bin_width < 1:
            raise HistogramError(f"bin width must be a positive integer, got {self.bin_width}")
        if self.max_bin is not None:
            if self.max_bin <= 0 or self.max_bin % self.bin_width:
                raise HistogramError(
                    f"max_bin ({self.max_bin}) must be a positive multiple of the bin width")


@dataclass(frozen=True)
class CitationHistogram:
    """Counts per bin; bin ``i`` covers ``[start + i*width, start + (i+1)*width)``.

    With ``overflow`` set the last bin is open-ended.
    """

    counts: tuple[int, ...]
    start: int = 0
    bin_width: int = 1
    overflow: bool = False
    label: str = ""
    # samples dropped because they fell past max_bin with no overflow bin
    truncated: int = 0

    def __post_init__(self):
        if not self.counts:
            raise HistogramError("histogram has no bins")
        if any(c < 0 for c in self.counts):
            raise HistogramError("bin counts must be non-negative")
        if self.start < 0 or self.start % self.bin_width:
            raise HistogramError("first bin edge must be a non-negative multiple of the width")

    @property
    def n_samples(self) -> int:
        return sum(self.counts)

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def edges(self) -> np.ndarray:
        """Lower edges l_i."""
        return self.start + self.bin_width * np.arange(self.n_bins, dtype=np.int64)

    @property
    def end(self) -> int:
        """Upper edge of the last bin (lower edge of the overflow bin when present)."""
        last = self.start + self.bin_width * self.n_bins
        return last - self.bin_width if self.overflow else last

    @property
    def probabilities(self) -> np.ndarray:
        n = self.n_samples
        if n == 0:
            raise HistogramError(f"histogram {self.label!r} is empty")
        # int/int true division is correctly rounded even for huge counts
        return np.array([c / n for c in self.counts], dtype=float)

    def bins(self) -> list[tuple[int, float]]:
        return list(zip(self.edges.tolist(), self.probabilities.tolist()))

    def probability_at(self, value: int) -> float:
        """Probability of the bin containing ``value``."""
        if value < self.start:
            return 0.0
        i = (value - self.start) // self.bin_width
        if i >= self.n_bins:
            if not self.overflow:
                return 0.0
            i = self.n_bins - 1
        return self.counts[i] / self.n_samples

    @property
    def zero_probability(self) -> float:
        return self.probability_at(0)

    def mean(self) -> float:
        """Sum of l_i * p_i; the overflow bin contributes its lower edge."""
        return float(sum(int(l) * c for l, c in zip(self.edges, self.counts)) / self.n_samples)

    def quantile_edge(self, q: float) -> int:
        """Lower edge of the first bin whose cumulative probability reaches ``q``."""
        cdf = np.cumsum(self.counts)
        i = int(np.searchsorted(cdf, q * self.n_samples - 1e-9 * self.n_samples, side="left"))
        return int(self.edges[min(i, self.n_bins - 1)])

    def mass_above(self, edge: int) -> float:
        """Probability carried by bins whose lower edge exceeds ``edge``."""
        mask = self.edges > edge
        return sum(c for c, m in zip(self.counts, mask) if m) / self.n_samples

    def with_label(self, label: str) -> "CitationHistogram":
        return replace(self, label=label)


def build_histogram(citation_counts: Iterable[int] | np.ndarray,
                    spec: BinningSpec = BinningSpec(), label: str = "") -> CitationHistogram:
    """Bin citation counts starting at 0.

    Without ``max_bin`` the grid reaches the largest observed count. With
    ``max_bin`` the grid is fixed to [0, max_bin) plus an overflow bin when
    ``include_overflow`` is set; otherwise values >= max_bin are dropped and
    reported in ``truncated``.
    """
    values = np.asarray(list(citation_counts) if not isinstance(citation_counts, np.ndarray)
                        else citation_counts)
    if values.size == 0:
        raise HistogramError(f"no citation counts to bin for {label!r}")
    if not np.issubdtype(values.dtype, np.integer):
        if not np.all(np.equal(np.mod(values, 1), 0)):
            raise HistogramError("citation counts must be integers")
        values = values.astype(np.int64)
    if values.min() < 0:
        raise HistogramError("citation counts must be non-negative")

    w = spec.bin_width
    idx = values // w
    truncated = 0
    overflow = False
    if spec.max_bin is not None:
        n_regular = spec.max_bin // w
        over = idx >= n_regular
        if spec.include_overflow:
            idx = np.where(over, n_regular, idx)
            overflow = True
            minlength = n_regular + 1
        else:
            truncated = int(over.sum())
            idx = idx[~over]
            minlength = n_regular
            if idx.size == 0:
                raise HistogramError(f"every count of {label!r} lies beyond max_bin")
    else:
        minlength = 0
    counts = np.bincount(idx, minlength=minlength)
    return CitationHistogram(tuple(int(c) for c in counts), 0, w, overflow, label, truncated)


def align_support(p: CitationHistogram,
                  q: CitationHistogram) -> tuple[CitationHistogram, CitationHistogram]:
    """Re-express both histograms on the union of their bin ranges (zero padded)."""
    if p.bin_width != q.bin_width:
        raise HistogramError(
            f"bin widths differ ({p.bin_width} vs {q.bin_width}); cannot align")
    if (p.overflow or q.overflow) and not (p.overflow and q.overflow and p.end == q.end):
        raise HistogramError("histograms with different overflow edges cannot be aligned")
    w = p.bin_width
    lo = min(p.start, q.start)
    hi = max(p.start + w * p.n_bins, q.start + w * q.n_bins)

    def pad(h: CitationHistogram) -> CitationHistogram:
        before = (h.start - lo) // w
        after = (hi - (h.start + w * h.n_bins)) // w
        if before == 0 and after == 0:
            return h
        return replace(h, counts=(0,) * before + h.counts + (0,) * after, start=lo)

    return pad(p), pad(q)


def histogram_rows(h: CitationHistogram) -> list[tuple[int, str, int, float]]:
    probs = h.probabilities
    rows = []
    for i, (lower, count) in enumerate(zip(h.edges.tolist(), h.counts)):
        last_overflow = h.overflow and i == h.n_bins - 1
        upper = "inf" if last_overflow else str(lower + h.bin_width)
        rows.append((lower, upper, count, float(probs[i])))
    return rows


def histogram_csv(hists: Sequence[CitationHistogram] | CitationHistogram,
                  with_label: bool = False) -> str:
    """Delimited export: l_lower, l_upper, count, probability (optionally scope first)."""
    if isinstance(hists, CitationHistogram):
        hists = [hists]
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    header = ["l_lower", "l_upper", "count", "probability"]
    writer.writerow((["scope"] if with_label else []) + header)
    for h in hists:
        for lower, upper, count, prob in histogram_rows(h):
            row = [lower, upper, count, repr(prob)]
            writer.writerow(([h.label] if with_label else []) + row)
    return buf.getvalue()
