"""Seeded synthetic citation corpora.

Randomness comes from numpy's ``Generator(PCG64(seed))``, whose streams are
stable across platforms and numpy releases, so a spec plus a seed pins the
output file byte for byte.

Each citation count is 0 with probability ``p_zero``; otherwise it is drawn
from n in [1, max_n] with probability proportional to n**-alpha by inverse
CDF over the exactly normalized finite support.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError, SynthError
from .ingest import CitationRecord, Discipline


@dataclass(frozen=True)
class PublisherSpec:
    name: str
    weight: float = 1.0
    # per-publisher overrides of the corpus-wide distribution
    p_zero: float | None = None
    alpha: float | None = None
    max_n: int | None = None
    issn_only: bool = False


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_records: int = 1000
    p_zero: float = 0.8
    alpha: float = 2.0
    max_n: int = 100
    publishers: tuple[PublisherSpec, ...] = (PublisherSpec("Publisher A"),)
    disciplines: tuple[tuple[str, float], ...] = (("SCI", 1.0),)
    overlap: float = 0.0  # chance a record also lands in a second discipline
    years: tuple[int, int] = (2005, 2011)

    def __post_init__(self):
        _check_params(self.p_zero, self.alpha, self.max_n, "corpus")
        if self.n_records < 0:
            raise SynthError("n_records must be non-negative")
        if not self.publishers:
            raise SynthError("at least one publisher is required")
        if not self.disciplines:
            raise SynthError("at least one discipline is required")
        for p in self.publishers:
            if not p.name.strip():
                raise SynthError("publisher names must be nonempty")
            if p.weight <= 0:
                raise SynthError(f"publisher {p.name!r}: weight must be positive")
            _check_params(p.p_zero if p.p_zero is not None else self.p_zero,
                          p.alpha if p.alpha is not None else self.alpha,
                          p.max_n if p.max_n is not None else self.max_n, p.name)
        for code, w in self.disciplines:
            try:
                Discipline.parse(code)
            except ValueError as exc:
                raise SynthError(str(exc)) from None
            if w <= 0:
                raise SynthError(f"discipline {code!r}: weight must be positive")
        if not 0 <= self.overlap <= 1:
            raise SynthError("overlap must lie in [0, 1]")
        if self.overlap > 0 and len(self.disciplines) < 2:
            raise SynthError("overlap needs at least two disciplines")
        if self.years[0] > self.years[1]:
            raise SynthError("years must be (first, last)")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        data = dict(data)
        try:
            pubs = []
            for p in data.pop("publishers", [{"name": "Publisher A"}]):
                if isinstance(p, (list, tuple)):
                    p = {"name": p[0], "weight": p[1], **(p[2] if len(p) > 2 else {})}
                pubs.append(PublisherSpec(**p))
            discs = [tuple(d) if isinstance(d, (list, tuple)) else (d["code"], d["weight"])
                     for d in data.pop("disciplines", [("SCI", 1.0)])]
            if "years" in data:
                data["years"] = tuple(data["years"])
            return cls(publishers=tuple(pubs), disciplines=tuple(discs), **data)
        except (TypeError, KeyError, IndexError) as exc:
            raise SynthError(f"bad synth spec: {exc}") from None


def _check_params(p_zero, alpha, max_n, who):
    if not 0 <= p_zero <= 1:
        raise SynthError(f"{who}: p_zero must lie in [0, 1]")
    if alpha < 1:
        raise SynthError(f"{who}: alpha must be at least 1")
    if int(max_n) != max_n or max_n < 1:
        raise SynthError(f"{who}: max_n must be a positive integer")


def load_spec(path: Union[str, os.PathLike]) -> SynthSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read synth spec {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SynthError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise SynthError(f"{path}: spec must be a JSON object")
    return SynthSpec.from_dict(data)


def _inverse_cdf(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(weights) - 1)


def lotka_weights(alpha: float, max_n: int) -> np.ndarray:
    """Unnormalized n**-alpha over n = 1..max_n."""
    return np.arange(1, max_n + 1, dtype=float) ** -alpha


def sample_citations(rng: np.random.Generator, size: int, p_zero: float,
                     alpha: float, max_n: int) -> np.ndarray:
    """Zero-inflated truncated power-law citation counts."""
    zero = rng.random(size) < p_zero
    tail = _inverse_cdf(lotka_weights(alpha, max_n), rng.random(size)) + 1
    return np.where(zero, 0, tail).astype(np.int64)


def generate(spec: SynthSpec) -> list[CitationRecord]:
    rng = np.random.default_rng(spec.seed)
    n = spec.n_records
    pub_w = np.array([p.weight for p in spec.publishers], dtype=float)
    pub_idx = _inverse_cdf(pub_w, rng.random(n))

    codes = [Discipline.parse(c) for c, _ in spec.disciplines]
    disc_w = np.array([w for _, w in spec.disciplines], dtype=float)
    first = _inverse_cdf(disc_w, rng.random(n))
    second = np.full(n, -1)
    if spec.overlap > 0:
        extra = rng.random(n) < spec.overlap
        u = rng.random(n)
        for i in range(len(codes)):
            w = disc_w.copy()
            w[i] = 0.0
            rows = extra & (first == i)
            second[rows] = _inverse_cdf(w, u[rows])

    citations = np.zeros(n, dtype=np.int64)
    for i, p in enumerate(spec.publishers):
        rows = np.flatnonzero(pub_idx == i)
        citations[rows] = sample_citations(
            rng, rows.size,
            p.p_zero if p.p_zero is not None else spec.p_zero,
            p.alpha if p.alpha is not None else spec.alpha,
            p.max_n if p.max_n is not None else spec.max_n)
    years = rng.integers(spec.years[0], spec.years[1] + 1, size=n)

    width = max(7, len(str(n)))
    records = []
    for k in range(n):
        pub = spec.publishers[pub_idx[k]]
        discs = [codes[first[k]]]
        if second[k] >= 0:
            discs.append(codes[second[k]])
        records.append(CitationRecord(
            record_id=f"s{k:0{width}d}",
            publisher_raw=pub.name,
            publisher=pub.name,
            year=int(years[k]),
            citations=int(citations[k]),
            categories=tuple(d.value for d in discs),
            disciplines=frozenset(discs),
            has_isbn=not pub.issn_only,
            has_issn=pub.issn_only,
        ))
    return records
