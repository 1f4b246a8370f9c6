"""Fitting phi(n) = C / n**alpha to the cited tail (n >= 1) of a histogram.

Methods:

``wls``  (default) least squares of log p_n on log n, each point weighted by
         its bin count. Var(log count) ~ 1/count, so this keeps sparse tail
         bins from dominating the slope.
``ols``  the same regression, unweighted.
``mle``  maximum likelihood for a discrete power law truncated at the largest
         observed tail value (unit bins only).

C is always on the scale of the full histogram (zero bin included), so it
reads as the share of chapters with exactly one citation.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import LotkaError
from .histograms import CitationHistogram

METHODS = ("wls", "ols", "mle")


@dataclass(frozen=True)
class LotkaFit:
    C: float
    alpha: float
    fit_error: float  # RMS log-space residual over the fitted points
    n_points: int
    method: str
    C_anchored: float | None = None  # observed p(1), when n = 1 is a bin of its own
    alpha_in_range: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True)
class ReportRow:
    n: int
    observed: float
    predicted: float
    residual: float
    used: bool


def _tail(hist: CitationHistogram, min_count: int):
    edges = hist.edges
    counts = np.array(hist.counts, dtype=float)
    tail = edges >= 1
    if hist.overflow:
        tail[-1] = False
    used = tail & (counts >= max(min_count, 1))
    return edges, counts, tail, used


def _line_fit(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Weighted least squares y = b + m x; returns (m, b)."""
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    if sxx == 0:
        raise LotkaError("tail points share a single citation value")
    m = (w * (x - xm) * (y - ym)).sum() / sxx
    return float(m), float(ym - m * xm)


def _mle_alpha(ns: np.ndarray, counts: np.ndarray) -> float:
    n_max = ns.max()
    support = np.arange(1, n_max + 1, dtype=float)
    log_support = np.log(support)
    total = counts.sum()
    weighted_log = (counts * np.log(ns)).sum()

    def nll(alpha):
        log_z = np.logaddexp.reduce(-alpha * log_support)
        return alpha * weighted_log + total * log_z

    res = minimize_scalar(nll, bounds=(1e-3, 20.0), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x)


def fit_lotka(hist: CitationHistogram, method: str = "wls", min_count: int = 1) -> LotkaFit:
    """Fit Lotka's law to the bins with lower edge >= 1.

    Bins with fewer than ``min_count`` observations (and always empty bins)
    are skipped. A fitted alpha below 1 is returned as is with
    ``alpha_in_range=False`` and a warning.
    """
    if method not in METHODS:
        raise LotkaError(f"unknown fit method {method!r}; choose from {METHODS}")
    n_total = float(hist.n_samples)
    if n_total == 0:
        raise LotkaError("empty histogram")
    edges, counts, _, used = _tail(hist, min_count)
    if used.sum() < 2:
        raise LotkaError(
            f"need at least 2 cited bins to fit {hist.label!r}, found {int(used.sum())}")
    x = np.log(edges[used].astype(float))
    y = np.log(counts[used] / n_total)

    if method == "mle":
        if hist.bin_width != 1:
            raise LotkaError("the mle method needs unit bins")
        ns = edges[used].astype(float)
        alpha = _mle_alpha(ns, counts[used])
        z = np.exp(np.logaddexp.reduce(-alpha * np.log(np.arange(1, ns.max() + 1))))
        c = float(counts[used].sum() / n_total / z)
    else:
        w = counts[used] if method == "wls" else np.ones_like(x)
        slope, intercept = _line_fit(x, y, w)
        alpha, c = -slope, math.exp(intercept)

    resid = y - (math.log(c) - alpha * x)
    fit_error = float(math.sqrt(float(np.mean(resid ** 2))))
    anchored = None
    if hist.bin_width == 1 and hist.start <= 1 < hist.start + hist.n_bins:
        anchored = hist.probability_at(1)
    in_range = alpha >= 1.0
    if not in_range:
        warnings.warn(f"fitted alpha {alpha:.4f} for {hist.label!r} is below 1", stacklevel=2)
    return LotkaFit(c, float(alpha), fit_error, int(used.sum()), method, anchored, in_range)


def lotka_predict(fit: LotkaFit, n: int) -> float:
    if n < 1:
        raise LotkaError(f"Lotka's law is defined for n >= 1, got {n}")
    return fit.C / n ** fit.alpha


def fit_report(hist: CitationHistogram, fit: LotkaFit, min_count: int = 1) -> list[ReportRow]:
    """Observed vs predicted probability for every cited bin."""
    edges, counts, tail, used = _tail(hist, min_count)
    n_total = float(hist.n_samples)
    rows = []
    for e, c, t, u in zip(edges.tolist(), counts.tolist(), tail, used):
        if not t:
            continue
        obs = c / n_total
        pred = lotka_predict(fit, e)
        rows.append(ReportRow(e, obs, pred, obs - pred, bool(u)))
    return rows


def report_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "observed", "predicted", "residual", "used"])
    for r in rows:
        writer.writerow([r.n, repr(r.observed), repr(r.predicted), repr(r.residual), int(r.used)])
    return buf.getvalue()
