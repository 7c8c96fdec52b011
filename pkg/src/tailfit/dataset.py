"""Corpus ingestion and reduction.

Three plain-text layouts are read, all UTF-8, comma separated, no header,
LF or CRLF line endings:

``per-author``  ``author_id,count``
``value-mult``  ``value,multiplicity``
``events``      ``author_id,year``

Blank lines and lines starting with ``#`` are skipped; tailfit's own text
outputs carry their run configuration in such comment lines.
"""
from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, ParseError

LAYOUTS = ("per-author", "value-mult")
YEAR_RANGE = (1900, 2100)


@dataclass(frozen=True, eq=False)
class CountSample:
    """Multiset of per-author publication counts for one corpus.

    Stored as sorted distinct ``values`` with their ``multiplicities``.
    """

    values: np.ndarray
    multiplicities: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        mult = np.asarray(self.multiplicities, dtype=np.int64)
        if values.ndim != 1 or values.shape != mult.shape:
            raise DomainError("values and multiplicities must be 1-d arrays of equal length")
        if values.size == 0:
            raise DomainError("a count sample needs at least one author")
        if np.any(values < 1):
            raise DomainError("counts must be positive integers")
        if np.any(mult < 1):
            raise DomainError("multiplicities must be positive")
        if np.any(np.diff(values) <= 0):
            order = np.argsort(values, kind="stable")
            values, mult = values[order], mult[order]
            if np.any(np.diff(values) == 0):
                raise DomainError("duplicate values in count sample")
        values.flags.writeable = False
        mult.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_values(cls, values: Iterable[int], label: str = "") -> "CountSample":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if arr.size == 0:
            raise DomainError("a count sample needs at least one author")
        if arr.dtype.kind == "f":
            if np.any(arr != np.round(arr)):
                raise DomainError("counts must be integers")
        uniq, mult = np.unique(arr.astype(np.int64), return_counts=True)
        return cls(uniq, mult, label)

    @classmethod
    def from_counts(cls, counts: Mapping[int, int], label: str = "") -> "CountSample":
        items = sorted((int(v), int(m)) for v, m in counts.items())
        if not items:
            raise DomainError("a count sample needs at least one author")
        values, mult = zip(*items)
        return cls(np.array(values), np.array(mult), label)

    @property
    def counts(self) -> dict[int, int]:
        return dict(zip(self.values.tolist(), self.multiplicities.tolist()))

    @property
    def size(self) -> int:
        """N_J, the number of authors."""
        return int(self.multiplicities.sum())

    @property
    def n_min_observed(self) -> int:
        return int(self.values[0])

    @property
    def max_value(self) -> int:
        return int(self.values[-1])

    def expand(self) -> np.ndarray:
        return np.repeat(self.values, self.multiplicities)

    def __eq__(self, other):
        if not isinstance(other, CountSample):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.multiplicities, other.multiplicities)
        )

    def __hash__(self):
        return hash((self.values.tobytes(), self.multiplicities.tobytes()))

    def __repr__(self):
        return f"CountSample(label={self.label!r}, N={self.size}, distinct={self.values.size})"


@dataclass(frozen=True, eq=False)
class EventLog:
    """Time-stamped publication events, one (author_id, year) per article."""

    authors: np.ndarray
    years: np.ndarray
    label: str = ""

    def __post_init__(self):
        authors = np.asarray(self.authors, dtype=object)
        years = np.asarray(self.years, dtype=np.int64)
        if authors.shape != years.shape or authors.ndim != 1:
            raise DomainError("authors and years must be 1-d arrays of equal length")
        if years.size and (years.min() < YEAR_RANGE[0] or years.max() > YEAR_RANGE[1]):
            raise DomainError(f"years must lie within {YEAR_RANGE}")
        object.__setattr__(self, "authors", authors)
        object.__setattr__(self, "years", years)

    @classmethod
    def from_events(cls, events: Iterable[tuple[str, int]], label: str = "") -> "EventLog":
        events = list(events)
        authors = np.empty(len(events), dtype=object)
        authors[:] = [str(a) for a, _ in events]
        return cls(authors, np.array([y for _, y in events], dtype=np.int64), label)

    @property
    def events(self) -> list[tuple[str, int]]:
        return list(zip(self.authors.tolist(), self.years.tolist()))

    @property
    def n_authors(self) -> int:
        return len(set(self.authors.tolist()))

    def __len__(self):
        return int(self.years.size)


@dataclass(frozen=True)
class Histogram:
    """Map from count value to proportion (``normalized``) or raw count."""

    bins: dict = field(default_factory=dict)
    normalized: bool = True


# ---------------------------------------------------------------------------
# parsing


def _read_lines(source):
    """Yield (line_number, stripped_text) for meaningful lines of ``source``.

    ``source`` may be a path, raw bytes, a binary stream or a text stream.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8 ({exc})") from None
    else:
        text = data
    for lineno, raw in enumerate(io.StringIO(text, newline=None), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _split_pair(line, lineno):
    parts = line.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 2 comma-separated fields, got {len(parts)}", lineno)
    return parts[0].strip(), parts[1].strip()


def _parse_int(text, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not an integer", lineno) from None


def load_author_counts(source) -> dict[str, int]:
    """Read the per-author layout into an ``{author_id: count}`` map."""
    out: dict[str, int] = {}
    for lineno, line in _read_lines(source):
        author, count_text = _split_pair(line, lineno)
        if not author:
            raise ParseError("blank author id", lineno)
        count = _parse_int(count_text, lineno, "count")
        if count <= 0:
            raise ParseError(f"count must be positive, got {count}", lineno)
        if author in out:
            raise ParseError(f"duplicate author id {author!r}", lineno)
        out[author] = count
    if not out:
        raise DomainError("empty input")
    return out


def load_counts(source, layout: str, label: str = "") -> CountSample:
    """Read a count sample in the ``per-author`` or ``value-mult`` layout."""
    if layout == "per-author":
        counts = Counter(load_author_counts(source).values())
        return CountSample.from_counts(counts, label)
    if layout != "value-mult":
        raise DomainError(f"unknown count layout {layout!r}; expected one of {LAYOUTS}")
    counts: dict[int, int] = {}
    for lineno, line in _read_lines(source):
        value_text, mult_text = _split_pair(line, lineno)
        value = _parse_int(value_text, lineno, "value")
        mult = _parse_int(mult_text, lineno, "multiplicity")
        if value <= 0:
            raise ParseError(f"value must be positive, got {value}", lineno)
        if mult <= 0:
            raise ParseError(f"multiplicity must be positive, got {mult}", lineno)
        if value in counts:
            raise ParseError(f"duplicate value {value}", lineno)
        counts[value] = mult
    if not counts:
        raise DomainError("empty input")
    return CountSample.from_counts(counts, label)


def load_events(source, label: str = "") -> EventLog:
    """Read ``author_id,year`` rows. Repeated rows are separate articles."""
    authors, years = [], []
    for lineno, line in _read_lines(source):
        author, year_text = _split_pair(line, lineno)
        if not author:
            raise ParseError("blank author id", lineno)
        year = _parse_int(year_text, lineno, "year")
        if not YEAR_RANGE[0] <= year <= YEAR_RANGE[1]:
            raise ParseError(f"year {year} outside {YEAR_RANGE}", lineno)
        authors.append(author)
        years.append(year)
    if not years:
        raise DomainError("empty input")
    arr = np.empty(len(authors), dtype=object)
    arr[:] = authors
    return EventLog(arr, np.array(years, dtype=np.int64), label)


def format_counts(data: CountSample) -> str:
    """Render ``data`` in the value-mult layout."""
    return "".join(f"{v},{m}\n" for v, m in zip(data.values.tolist(), data.multiplicities.tolist()))


def write_counts(data: CountSample, stream) -> None:
    text = format_counts(data)
    try:
        stream.write(text)
    except TypeError:
        stream.write(text.encode("utf-8"))


# ---------------------------------------------------------------------------
# reductions


def truncate_min(data: CountSample, n_min: int) -> CountSample:
    """Drop every author with fewer than ``n_min`` publications."""
    if int(n_min) != n_min or n_min < 1:
        raise DomainError(f"n_min must be a positive integer, got {n_min!r}")
    keep = data.values >= n_min
    if not np.any(keep):
        raise DomainError(f"no author has at least {n_min} publications")
    return CountSample(data.values[keep], data.multiplicities[keep], data.label)


def author_counts_by_year(log: EventLog, cutoff_year: int, first_year: int = YEAR_RANGE[0]) -> dict[str, int]:
    """Per-author article counts over events with first_year <= year <= cutoff_year."""
    if cutoff_year < YEAR_RANGE[0]:
        raise DomainError(f"cutoff year must be >= {YEAR_RANGE[0]}, got {cutoff_year}")
    mask = (log.years <= cutoff_year) & (log.years >= first_year)
    counts = Counter(log.authors[mask].tolist())
    if not counts:
        raise DomainError(f"no events between {first_year} and {cutoff_year}")
    return dict(counts)


def reduce_by_year(log: EventLog, cutoff_year: int, first_year: int = YEAR_RANGE[0]) -> CountSample:
    """Count each author's articles up to and including ``cutoff_year``."""
    counts = author_counts_by_year(log, cutoff_year, first_year)
    label = f"{log.label} (<= {cutoff_year})" if log.label else f"<= {cutoff_year}"
    return CountSample.from_counts(Counter(counts.values()), label)


def proportion_histogram(data: CountSample) -> Histogram:
    """a(n): the share of authors with exactly n publications."""
    total = data.size
    bins = {int(v): int(m) / total for v, m in zip(data.values, data.multiplicities)}
    return Histogram(bins, normalized=True)


def count_histogram(data: CountSample) -> Histogram:
    return Histogram(data.counts, normalized=False)


def empirical_cdf(data: CountSample):
    """Return S with S(k) = share of authors with at most k publications.

    S accepts scalars or arrays and is a right-continuous step function.
    """
    cum = np.cumsum(data.multiplicities) / data.size
    values = data.values

    def S(k):
        k = np.asarray(k)
        idx = np.searchsorted(values, k, side="right")
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    return S
