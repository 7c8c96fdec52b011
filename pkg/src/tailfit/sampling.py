"""Inverse-CDF sampling with reproducible, splittable random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataset import CountSample
from .distributions import ModelSpec, cdf, log_sf
from .errors import DomainError

SAMPLE_TABLE_CAP = 1 << 20
# Draws are clamped here so they fit in a signed 64-bit integer.
MAX_VALUE = 1 << 62

_UINT64 = 1 << 64


@dataclass(frozen=True)
class SeededRng:
    """A (seed, stream_id) pair naming one independent random stream.

    Streams come from ``numpy.random.SeedSequence`` spawn keys, so stream i
    is the same sequence whichever thread or process draws it.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value < _UINT64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


@lru_cache(maxsize=64)
def _inverse_table(spec: ModelSpec) -> np.ndarray:
    # Grow by powers of two until the uncovered mass is small or the cap is hit.
    length = 1024
    while length < SAMPLE_TABLE_CAP and log_sf(spec, spec.n_min + length - 1) > math.log(1e-7):
        length *= 4
    length = min(length, SAMPLE_TABLE_CAP)
    table = cdf(spec, np.arange(spec.n_min, spec.n_min + length))
    table.flags.writeable = False
    return table


def _invert_tail(spec: ModelSpec, u: np.ndarray, lo: int) -> np.ndarray:
    """Smallest n > lo with cdf(n) >= u, for each u (all with cdf(lo) < u)."""
    lo = np.full(u.shape, lo, dtype=np.int64)
    hi = lo.copy()
    step = np.ones(u.shape, dtype=np.int64)
    # exponential search for an upper end
    pending = np.ones(u.shape, dtype=bool)
    while np.any(pending):
        cand = np.minimum(lo[pending] + step[pending], MAX_VALUE)
        ok = cdf(spec, cand) >= u[pending]
        ok |= cand >= MAX_VALUE
        idx = np.flatnonzero(pending)
        hi[idx[ok]] = cand[ok]
        lo[idx[~ok]] = cand[~ok]
        step[idx[~ok]] *= 2
        pending[idx[ok]] = False
    # bisection on (lo, hi]
    while True:
        open_ = hi - lo > 1
        if not np.any(open_):
            return hi
        mid = lo[open_] + (hi[open_] - lo[open_]) // 2
        ok = cdf(spec, mid) >= u[open_]
        idx = np.flatnonzero(open_)
        hi[idx[ok]] = mid[ok]
        lo[idx[~ok]] = mid[~ok]


def sample_values(spec: ModelSpec, rng: "SeededRng | np.random.Generator", count: int) -> np.ndarray:
    """Draw ``count`` values from ``spec`` as an int64 array."""
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    u = gen.random(int(count))
    table = _inverse_table(spec)
    idx = np.searchsorted(table, u, side="left")
    out = spec.n_min + idx.astype(np.int64)
    beyond = idx >= table.size
    if np.any(beyond):
        out[beyond] = _invert_tail(spec, u[beyond], spec.n_min + table.size - 1)
    return out


def sample(spec: ModelSpec, rng: "SeededRng | np.random.Generator", count: int, label: str = "") -> CountSample:
    """Draw ``count`` independent values from ``spec``."""
    return CountSample.from_values(sample_values(spec, rng, count), label=label or f"synthetic {spec}")
