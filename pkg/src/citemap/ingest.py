"""Reading citation record files, publisher aliasing and discipline assignment.

Record files are UTF-8 CSV with a header row::

    record_id,publisher_raw,year,citations,categories,has_isbn,has_issn
    r1,Springer-Verlag Wien,2007,3,Physics;Optics,1,0

``has_isbn`` and ``has_issn`` may be left out of the header, in which case
they default to 0. A JSON-lines variant with the same field names is also
accepted (one object per line).
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Sequence, Union

from .errors import IngestError

REQUIRED_COLUMNS = ("record_id", "publisher_raw", "year", "citations", "categories")
FLAG_COLUMNS = ("has_isbn", "has_issn")
RECORD_COLUMNS = REQUIRED_COLUMNS + FLAG_COLUMNS

UNMAPPED = "Unmapped"


class Discipline(str, Enum):
    """The four macro areas records are aggregated into."""

    AH = "AH"
    SCI = "SCI"
    SOC = "SOC"
    ET = "ET"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Discipline":
        key = _fold(text).replace("&", "").replace(" ", "").replace("_", "")
        try:
            return _LOOKUP[key]
        except KeyError:
            raise ValueError(f"unknown discipline {text!r}") from None


_LABELS = {
    Discipline.AH: "ArtsHumanities",
    Discipline.SCI: "Science",
    Discipline.SOC: "SocialSciences",
    Discipline.ET: "EngineeringTechnology",
}
_LOOKUP = {}
for _d, _name in _LABELS.items():
    _LOOKUP[_d.value.casefold()] = _d
    _LOOKUP[_name.casefold()] = _d
_LOOKUP["artshumanities"] = Discipline.AH
_LOOKUP["engineeringtechnology"] = Discipline.ET


def clean_name(raw: str) -> str:
    """Trim and collapse internal whitespace."""
    return " ".join(raw.split())


def _fold(raw: str) -> str:
    return clean_name(raw).casefold()


@dataclass(frozen=True)
class CitationRecord:
    record_id: str
    publisher_raw: str
    publisher: str
    year: int
    citations: int
    categories: tuple[str, ...]
    disciplines: frozenset[Discipline] = frozenset()
    has_isbn: bool = False
    has_issn: bool = False
    unaliased: bool = False
    # categories that had no entry in the category map
    unmapped_categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.citations < 0:
            raise ValueError(f"record {self.record_id}: negative citation count")
        if not self.publisher:
            raise ValueError(f"record {self.record_id}: empty publisher")

    @property
    def is_unmapped(self) -> bool:
        return not self.disciplines

    @property
    def serial_like(self) -> bool:
        """ISSN present but no ISBN: the record behaves like a journal item."""
        return self.has_issn and not self.has_isbn


@dataclass(frozen=True)
class Diagnostic:
    line: int | None  # None for record-level findings
    message: str
    source: str = ""

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.source}: {self.message}" if self.source else self.message
        where = f"{self.source}:{self.line}" if self.source else f"line {self.line}"
        return f"{where}: {self.message}"


@dataclass
class ParseResult:
    records: list[CitationRecord]
    diagnostics: list[Diagnostic] = field(default_factory=list)


class AliasTable:
    """Exact (case-folded, whitespace-collapsed) publisher alias lookup.

    Every canonical name is registered as its own alias, so lookups are
    idempotent.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]] | Mapping[str, str] = ()):
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        pairs = [(clean_name(r), clean_name(c)) for r, c in pairs]
        entries: dict[str, str] = {}
        for raw, canonical in pairs:
            if not raw or not canonical:
                raise IngestError("alias table rows need a raw and a canonical name")
            key = raw.casefold()
            if entries.get(key, canonical) != canonical:
                raise IngestError(
                    f"alias {raw!r} maps to both {entries[key]!r} and {canonical!r}")
            entries[key] = canonical
        for canonical in {c for _, c in pairs}:
            key = canonical.casefold()
            if entries.get(key, canonical) != canonical:
                raise IngestError(
                    f"canonical name {canonical!r} is itself aliased to {entries[key]!r}")
            entries[key] = canonical
        self.entries: dict[str, str] = entries

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, raw: str) -> str | None:
        return self.entries.get(_fold(raw))


def normalize_publisher(raw: str, aliases: AliasTable) -> str:
    """Map a raw publisher string onto its canonical name.

    Unknown names come back cleaned (trimmed, single-spaced) but otherwise
    unchanged.
    """
    cleaned = clean_name(raw)
    if not cleaned:
        raise IngestError("publisher name is empty")
    hit = aliases.lookup(cleaned)
    return cleaned if hit is None else hit


def apply_aliases(record: CitationRecord, aliases: AliasTable) -> CitationRecord:
    hit = aliases.lookup(record.publisher_raw)
    if hit is None:
        return replace(record, publisher=clean_name(record.publisher_raw), unaliased=True)
    return replace(record, publisher=hit, unaliased=False)


class CategoryMap:
    """Subject category -> set of disciplines."""

    def __init__(self, entries: Mapping[str, Iterable[Discipline | str]] = ()):
        if isinstance(entries, Mapping):
            entries = entries.items()
        self.entries: dict[str, frozenset[Discipline]] = {}
        for category, discs in entries:
            parsed = frozenset(d if isinstance(d, Discipline) else Discipline.parse(d)
                               for d in discs)
            if not parsed:
                raise IngestError(f"category {category!r} maps to no discipline")
            self.entries[_fold(category)] = parsed

    @classmethod
    def identity(cls) -> "CategoryMap":
        """Discipline codes and labels used directly as categories."""
        pairs = {}
        for d in Discipline:
            pairs[d.value] = [d]
            pairs[d.label] = [d]
        return cls(pairs)

    def get(self, category: str) -> frozenset[Discipline] | None:
        return self.entries.get(_fold(category))


def assign_disciplines(record: CitationRecord, cmap: CategoryMap) -> CitationRecord:
    """Union the disciplines of every category of ``record``.

    Categories missing from the map are listed in ``unmapped_categories``; a
    record with no mapped category at all lands in the Unmapped bucket
    (empty ``disciplines``).
    """
    found: set[Discipline] = set()
    missing = []
    for cat in record.categories:
        discs = cmap.get(cat)
        if discs is None:
            missing.append(cat)
        else:
            found |= discs
    return replace(record, disciplines=frozenset(found), unmapped_categories=tuple(missing))


# -- parsing ---------------------------------------------------------------

def _parse_flag(value, name: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip()
    if text in ("", "0"):
        return False
    if text == "1":
        return True
    raise ValueError(f"{name} must be 0 or 1, got {value!r}")


def _parse_int(value, name: str) -> int:
    if isinstance(value, bool):
        raise ValueError(f"{name} must be an integer")
    if isinstance(value, int):
        return value
    text = str(value).strip()
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None


def _split_categories(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = str(value).split(";")
    return tuple(c for c in (clean_name(str(i)) for i in items) if c)


def _build_record(row: Mapping[str, object]) -> CitationRecord:
    record_id = str(row["record_id"]).strip()
    if not record_id:
        raise ValueError("record_id is empty")
    publisher_raw = str(row["publisher_raw"])
    publisher = clean_name(publisher_raw)
    if not publisher:
        raise ValueError("publisher_raw is empty")
    citations = _parse_int(row["citations"], "citations")
    if citations < 0:
        raise ValueError("citations must be non-negative")
    return CitationRecord(
        record_id=record_id,
        publisher_raw=publisher_raw,
        publisher=publisher,
        year=_parse_int(row["year"], "year"),
        citations=citations,
        categories=_split_categories(row["categories"]),
        has_isbn=_parse_flag(row.get("has_isbn", 0), "has_isbn"),
        has_issn=_parse_flag(row.get("has_issn", 0), "has_issn"),
    )


def _iter_csv(text: str, source: str, diags: list[Diagnostic]):
    reader = csv.reader(io.StringIO(text, newline=""))
    header = None
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            header = [c.strip() for c in row]
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise IngestError(f"{source or 'input'}: header lacks columns {missing}")
            continue
        if len(row) != len(header):
            diags.append(Diagnostic(
                line, f"expected {len(header)} fields, found {len(row)}", source))
            continue
        yield line, dict(zip(header, row))


def _iter_jsonl(text: str, source: str, diags: list[Diagnostic]):
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            diags.append(Diagnostic(line, f"invalid JSON: {exc.msg}", source))
            continue
        if not isinstance(obj, dict):
            diags.append(Diagnostic(line, "expected a JSON object", source))
            continue
        missing = [c for c in REQUIRED_COLUMNS if c not in obj]
        if missing:
            diags.append(Diagnostic(line, f"missing fields {missing}", source))
            continue
        yield line, obj


def parse_records(stream: Union[bytes, BinaryIO], fmt: str = "csv",
                  source: str = "") -> ParseResult:
    """Parse a record stream.

    Malformed rows are reported in ``diagnostics`` with their line number
    and skipped. When a record_id repeats, the later row replaces the
    earlier one (at the later position) and a diagnostic is emitted.
    """
    try:
        data = stream if isinstance(stream, bytes) else stream.read()
        text = data.decode("utf-8-sig")
    except (OSError, UnicodeDecodeError, AttributeError) as exc:
        raise IngestError(f"cannot read {source or 'input'}: {exc}") from exc

    diags: list[Diagnostic] = []
    if fmt == "csv":
        rows = _iter_csv(text, source, diags)
    elif fmt == "jsonl":
        rows = _iter_jsonl(text, source, diags)
    else:
        raise IngestError(f"unknown record format {fmt!r}")

    by_id: dict[str, tuple[int, CitationRecord]] = {}
    for line, row in rows:
        try:
            rec = _build_record(row)
        except (ValueError, TypeError) as exc:
            diags.append(Diagnostic(line, str(exc), source))
            continue
        if rec.record_id in by_id:
            prev = by_id.pop(rec.record_id)[0]
            diags.append(Diagnostic(
                line, f"duplicate record_id {rec.record_id!r} (first seen line {prev}); "
                      "keeping this row", source))
        by_id[rec.record_id] = (line, rec)
    records = [rec for _, rec in by_id.values()]
    diags.sort(key=lambda d: (d.source, d.line))
    return ParseResult(records, diags)


def format_for(path: Union[str, os.PathLike]) -> str:
    return "jsonl" if Path(path).suffix.lower() in (".jsonl", ".ndjson") else "csv"


def serialize_records(records: Sequence[CitationRecord], fmt: str = "csv") -> str:
    """Inverse of :func:`parse_records` for the stored fields."""
    if fmt == "jsonl":
        lines = []
        for r in records:
            lines.append(json.dumps({
                "record_id": r.record_id, "publisher_raw": r.publisher_raw,
                "year": r.year, "citations": r.citations,
                "categories": list(r.categories),
                "has_isbn": int(r.has_isbn), "has_issn": int(r.has_issn),
            }, ensure_ascii=False))
        return "".join(line + "\n" for line in lines)
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow([r.record_id, r.publisher_raw, r.year, r.citations,
                         ";".join(r.categories), int(r.has_isbn), int(r.has_issn)])
    return buf.getvalue()


def _read_two_columns(text: str, header: tuple[str, str]) -> list[tuple[str, str]]:
    rows = [row for row in csv.reader(io.StringIO(text, newline="")) if row and any(row)]
    if rows and tuple(c.strip().casefold() for c in rows[0][:2]) == header:
        rows = rows[1:]
    out = []
    for i, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise IngestError(f"row {i}: expected 2 columns, found {len(row)}")
        out.append((row[0], row[1]))
    return out


def load_alias_table(path: Union[str, os.PathLike]) -> AliasTable:
    text = Path(path).read_text(encoding="utf-8-sig")
    return AliasTable(_read_two_columns(text, ("raw_name", "canonical_name")))


def load_category_map(path: Union[str, os.PathLike]) -> CategoryMap:
    text = Path(path).read_text(encoding="utf-8-sig")
    pairs = []
    for category, codes in _read_two_columns(text, ("category", "disciplines")):
        try:
            discs = [Discipline.parse(c) for c in codes.split(";") if c.strip()]
        except ValueError as exc:
            raise IngestError(f"category {category!r}: {exc}") from None
        pairs.append((category, discs))
    return CategoryMap(pairs)


@dataclass
class Corpus:
    records: list[CitationRecord]
    diagnostics: list[Diagnostic]

    @property
    def unmapped(self) -> list[CitationRecord]:
        return [r for r in self.records if r.is_unmapped]

    def in_discipline(self, discipline: Discipline) -> list[CitationRecord]:
        return [r for r in self.records if discipline in r.disciplines]


def load_corpus(paths: Union[str, os.PathLike, Sequence[Union[str, os.PathLike]]],
                aliases: AliasTable | None = None,
                categories: CategoryMap | None = None) -> Corpus:
    """Read one or more record files and run aliasing and discipline assignment.

    Without a category map, categories are read as discipline codes/labels.
    """
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    aliases = aliases if aliases is not None else AliasTable()
    categories = categories if categories is not None else CategoryMap.identity()

    merged: dict[str, CitationRecord] = {}
    diags: list[Diagnostic] = []
    for path in paths:
        try:
            with open(path, "rb") as fh:
                result = parse_records(fh, format_for(path), source=str(path))
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc}") from exc
        diags.extend(result.diagnostics)
        for rec in result.records:
            rec = assign_disciplines(apply_aliases(rec, aliases), categories)
            if rec.record_id in merged:
                diags.append(Diagnostic(None, f"record_id {rec.record_id!r} repeated across "
                                           "files; keeping the later one", str(path)))
                del merged[rec.record_id]
            merged[rec.record_id] = rec
    for rec in merged.values():
        for cat in rec.unmapped_categories:
            msg = f"record {rec.record_id}: category {cat!r} not in category map"
            if rec.is_unmapped:
                msg += f" (record placed in {UNMAPPED})"
            diags.append(Diagnostic(None, msg))
        if not rec.categories:
            diags.append(Diagnostic(None, f"record {rec.record_id}: no categories "
                                       f"(record placed in {UNMAPPED})"))
    return Corpus(list(merged.values()), diags)
