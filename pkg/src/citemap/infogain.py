"""Information gain between a reference histogram and an input histogram.

The gain of a reference distribution P from an input distribution Q is the
expected extra unexpectedness of P's events when they are scored with Q
instead of P, using h(p) = -log p for a single event::

    U_P(Q) = -sum_i P_i log Q_i          (cross-entropy)
    U_P(P) = -sum_i P_i log P_i          (entropy)
    gain   = a * (U_P(Q) - U_P(P)) = a * sum_i P_i log(P_i / Q_i)

Logs are natural (nats); ``a`` rescales to any other base. P is the
discipline, Q the publisher.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import GainError, HistogramError
from .histograms import CitationHistogram, align_support


class SmoothingPolicy(str, Enum):
    """What to do when P has mass in a bin where Q has none."""

    ADDITIVE = "additive"
    ERROR = "error"
    COMMON_SUPPORT = "common-support"


@dataclass(frozen=True)
class InfoGainResult:
    gain: float
    unexpectedness_estimated: float
    unexpectedness_true: float
    scale: float
    smoothing_applied: bool
    reference: str = ""
    label: str = ""


def _xlogy_sum(p: Sequence[float], q: Sequence[float]) -> float:
    """-sum p*log(q) over p > 0, summed with compensation."""
    return -math.fsum(pi * math.log(qi) for pi, qi in zip(p, q) if pi > 0)


def _kl_sum(p: Sequence[float], q: Sequence[float]) -> float:
    return math.fsum(pi * math.log(pi / qi) for pi, qi in zip(p, q) if pi > 0)


def gain_from_probabilities(p: Sequence[float], q: Sequence[float],
                            a: float = 1.0) -> tuple[float, float, float]:
    """(gain, U_P(Q), U_P(P)) for probability vectors on a shared grid.

    Every bin with ``p > 0`` must have ``q > 0``.
    """
    if a < 0:
        raise GainError(f"scale a must be non-negative, got {a}")
    if len(p) != len(q):
        raise GainError("probability vectors have different lengths")
    if any(pi > 0 and qi <= 0 for pi, qi in zip(p, q)):
        raise GainError("reference has mass where the input has none")
    cross = _xlogy_sum(p, q)
    entropy = _xlogy_sum(p, p)
    # direct sum of log-ratios is exact for p == q and avoids cancellation
    return a * _kl_sum(p, q), cross, entropy


def _smooth_additive(q_counts: Sequence[int]) -> np.ndarray:
    n = sum(q_counts)
    eps0 = 1.0 / (2 * n)
    k = len(q_counts)
    return np.array([(c / n + eps0) / (1.0 + k * eps0) for c in q_counts])


def information_gain(p: CitationHistogram, q: CitationHistogram, a: float = 1.0,
                     smoothing: SmoothingPolicy | str = SmoothingPolicy.ADDITIVE
                     ) -> InfoGainResult:
    """Gain of reference ``p`` (discipline) from input ``q`` (publisher).

    When ``p`` has mass in a bin where ``q`` is empty the smoothing policy
    decides: ADDITIVE adds 1/(2 n_q) to every bin of ``q`` and renormalizes;
    COMMON_SUPPORT drops those bins and renormalizes both; ERROR raises.
    """
    smoothing = SmoothingPolicy(smoothing)
    if a < 0:
        raise GainError(f"scale a must be non-negative, got {a}")
    if p.n_samples == 0 and q.n_samples == 0:
        raise GainError("both histograms are empty")
    if p.n_samples == 0 or q.n_samples == 0:
        raise GainError(f"empty histogram: {p.label if p.n_samples == 0 else q.label!r}")
    try:
        p, q = align_support(p, q)
    except HistogramError as exc:
        raise GainError(str(exc)) from exc

    pp = p.probabilities
    qq = q.probabilities
    uncovered = np.array([pc > 0 and qc == 0 for pc, qc in zip(p.counts, q.counts)])
    applied = bool(uncovered.any())
    if applied:
        if smoothing is SmoothingPolicy.ERROR:
            bad = p.edges[uncovered].tolist()
            raise GainError(f"{q.label or 'input'} has no mass in bins {bad} "
                            f"where {p.label or 'reference'} does")
        if smoothing is SmoothingPolicy.ADDITIVE:
            qq = _smooth_additive(q.counts)
        else:
            keep = [qc > 0 for qc in q.counts]
            kept_p = sum(pc for pc, k in zip(p.counts, keep) if k)
            if kept_p == 0:
                raise GainError(f"{p.label or 'reference'} and {q.label or 'input'} "
                                "share no support")
            kept_q = q.n_samples
            pp = np.array([pc / kept_p for pc, k in zip(p.counts, keep) if k])
            qq = np.array([qc / kept_q for qc, k in zip(q.counts, keep) if k])

    gain, cross, entropy = gain_from_probabilities(pp.tolist(), qq.tolist(), a)
    return InfoGainResult(gain, cross, entropy, a, applied, p.label, q.label)


def rank_by_gain(reference: CitationHistogram,
                 inputs: Sequence[tuple[str, CitationHistogram]],
                 a: float = 1.0,
                 smoothing: SmoothingPolicy | str = SmoothingPolicy.ADDITIVE,
                 ) -> tuple[list[InfoGainResult], dict[str, str]]:
    """Gains of ``reference`` from every input, smallest (most alike) first.

    Ties are ordered by label. Inputs whose gain cannot be computed are
    returned in the second element as ``{label: message}``.
    """
    if not inputs:
        raise GainError("nothing to rank")
    results = []
    failures: dict[str, str] = {}
    for label, hist in inputs:
        try:
            r = information_gain(reference, hist.with_label(label), a, smoothing)
        except GainError as exc:
            failures[label] = str(exc)
            continue
        results.append(r)
    results.sort(key=lambda r: (r.gain, r.label))
    return results, failures


def ranking_csv(results: Sequence[InfoGainResult], stats_by_label: dict,
                excluded: frozenset[str] | set[str] = frozenset()) -> str:
    """Ranking export: rank, label, gain, citation_average, nr_bc, smoothing_applied, excluded."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "label", "gain", "citation_average", "nr_bc",
                     "smoothing_applied", "excluded"])
    for rank, r in enumerate(results, start=1):
        st = stats_by_label.get(r.label)
        writer.writerow([
            rank, r.label, repr(r.gain),
            repr(st.citation_average) if st else "",
            st.nr_bc if st else "",
            int(r.smoothing_applied), int(r.label in excluded),
        ])
    return buf.getvalue()
