"""Derived analyses: power-law count ceiling, key players, joint histograms
with peak finding, and preferential-attachment rates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dataset import CountSample, EventLog, Histogram
from .distributions import Family, ModelSpec, log_normalizer
from .errors import DomainError
from .fitting import FitResult

DEFAULT_WINDOW = 10
DEFAULT_PROMINENCE = 3.0


@dataclass(frozen=True)
class KeyPlayerReport:
    n_max: float
    exceeders: list  # (count value, multiplicity), ascending by value
    fitted_alpha: float
    N_J: int


@dataclass(frozen=True)
class RatePoint:
    k: int
    t: int
    N_k: int
    m_k: int

    @property
    def rate(self) -> float:
        return self.m_k / self.N_k


@dataclass(frozen=True)
class PrefAttachResult:
    points: list
    pearson_r: float
    r_defined: bool
    note: str = ""


@dataclass(frozen=True)
class Histogram2D:
    bins: dict = field(default_factory=dict)  # (count_A, count_B) -> authors

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def top_cells(self, k: int = 2) -> list:
        """The ``k`` most populated cells, ties broken by coordinates."""
        return sorted(self.bins.items(), key=lambda kv: (-kv[1], kv[0]))[:k]

    def rows(self) -> list[tuple[int, int, int]]:
        return [(a, b, n) for (a, b), n in sorted(self.bins.items())]


def n_max(n_authors: float, spec: ModelSpec) -> float:
    """Largest count one author would reach if counts followed ``spec``.

    Solves N * C * n**-alpha = 1 for n, with C the power-law normalizer on
    the support of ``spec``.
    """
    if spec.family is not Family.POWER_LAW:
        raise DomainError(f"n_max needs a power-law spec, got {spec.family.label}")
    if not n_authors >= 1:
        raise DomainError(f"number of authors must be >= 1, got {n_authors}")
    alpha = spec.params[0]
    return math.exp((math.log(n_authors) - log_normalizer(spec)) / alpha)


def key_players(data: CountSample, fit: FitResult) -> KeyPlayerReport:
    """Count values strictly above the power-law ceiling, with multiplicities."""
    bound = n_max(data.size, fit.spec)
    over = data.values > bound
    exceeders = list(zip(data.values[over].tolist(), data.multiplicities[over].tolist()))
    return KeyPlayerReport(bound, exceeders, fit.spec.params[0], data.size)


def joint_histogram(
    counts_a: Mapping[str, int],
    counts_b: Mapping[str, int],
    range_a: tuple[int, int] | None = None,
    range_b: tuple[int, int] | None = None,
) -> Histogram2D:
    """Authors present in both corpora, binned by their pair of counts.

    ``range_a``/``range_b`` (inclusive) restrict the cells, the way one
    crosses only the authors whose counts fall in a window of interest.
    """
    bins: dict = {}
    for author, a in counts_a.items():
        b = counts_b.get(author)
        if b is None:
            continue
        if range_a is not None and not range_a[0] <= a <= range_a[1]:
            continue
        if range_b is not None and not range_b[0] <= b <= range_b[1]:
            continue
        bins[(a, b)] = bins.get((a, b), 0) + 1
    return Histogram2D(bins)


def detect_peaks(
    h: Histogram,
    window: int = DEFAULT_WINDOW,
    min_prominence: float = DEFAULT_PROMINENCE,
) -> list[tuple[int, float]]:
    """Local maxima of a 1-d histogram.

    A bin is a peak when it is the strict maximum of the bins within
    +-``window`` and exceeds ``min_prominence`` times their median. Missing
    values count as empty bins; the first and last bins of the range are
    never peaks. Returned by decreasing height.
    """
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    if not h.bins:
        return []
    lo, hi = min(h.bins), max(h.bins)
    heights = np.zeros(hi - lo + 1)
    for value, height in h.bins.items():
        heights[value - lo] = height
    peaks = []
    for i in range(1, heights.size - 1):
        left, right = max(0, i - window), min(heights.size, i + window + 1)
        seg = heights[left:right]
        others = np.delete(seg, i - left)
        if heights[i] > others.max() and heights[i] > min_prominence * np.median(seg):
            peaks.append((lo + i, float(heights[i])))
    peaks.sort(key=lambda p: (-p[1], p[0]))
    return peaks


def pref_attach_rates(
    log: EventLog,
    years: tuple[int, int],
    include_inactive: bool = False,
) -> PrefAttachResult:
    """Publication rate per prior count k, pooled over the years in ``years``.

    For year t, k is an author's article count through year t - 1. N_k(t)
    counts the authors holding k >= 1 who publish in year t (all authors
    holding k if ``include_inactive``) and m_k(t) their year-t articles.
    The Pearson correlation between k and m_k/N_k is taken over all points.
    """
    first, last = int(years[0]), int(years[1])
    if last < first:
        raise DomainError(f"empty year range {first}:{last}")
    if len(log) == 0 or not np.any(log.years < first):
        raise DomainError(f"no events before {first}; every author would have k = 0")

    _, codes = np.unique(log.authors.astype(str), return_inverse=True)
    n_authors = int(codes.max()) + 1
    prior = np.bincount(codes[log.years < first], minlength=n_authors)

    points: list[RatePoint] = []
    for t in range(first, last + 1):
        now = np.bincount(codes[log.years == t], minlength=n_authors)
        eligible = prior >= 1
        if not include_inactive:
            eligible &= now >= 1
        k = prior[eligible]
        if k.size:
            n_k = np.bincount(k)
            m_k = np.bincount(k, weights=now[eligible]).astype(np.int64)
            for kk in np.flatnonzero(n_k):
                points.append(RatePoint(int(kk), t, int(n_k[kk]), int(m_k[kk])))
        prior = prior + now

    if not points:
        return PrefAttachResult([], math.nan, False, "no author active in the year range")
    ks = np.array([p.k for p in points], dtype=float)
    rates = np.array([p.rate for p in points])
    if ks.size < 2 or np.ptp(ks) == 0 or np.ptp(rates) == 0:
        return PrefAttachResult(points, math.nan, False, "zero variance in k or rate")
    r = float(np.corrcoef(ks, rates)[0, 1])
    return PrefAttachResult(points, r, True)
