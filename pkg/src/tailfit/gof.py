"""Parametric-bootstrap Kolmogorov-Smirnov goodness-of-fit test.

The family is fitted to the data, ``replicates`` synthetic samples of the
same size are drawn from the fit, each synthetic sample is refitted, and the
p-value is the share of replicates whose KS distance to their own refit is
strictly larger than the observed distance.

Replicate i draws from stream ``i + 1`` of the run seed, so results do not
depend on how replicates are spread over worker processes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import CountSample
from .distributions import Family, ModelSpec, cdf
from .errors import DegenerateDataError, DomainError, GofError
from .fitting import FitResult, fit
from .sampling import SeededRng, sample_values

DEFAULT_REPLICATES = 5000
REJECTION_LEVEL = 0.05
MAX_FAILED_SHARE = 0.01
_RETRY_BIT = 1 << 63


@dataclass(frozen=True, eq=False)
class GofResult:
    observed_ks: float
    replicate_ks: np.ndarray
    p_value: float
    replicates: int
    seed: int
    fitted: FitResult
    failed: tuple[int, ...] = field(default=())

    @property
    def rejected(self) -> bool:
        return self.p_value < REJECTION_LEVEL


def ks_distance(empirical: CountSample, spec: ModelSpec) -> float:
    """max_k |S(k) - P(k)| between the empirical and model CDFs.

    On a discrete support the difference is maximized at a data value or
    just below one, so only those points are examined.
    """
    if empirical is None or empirical.size == 0:
        raise DomainError("KS distance of an empty sample")
    if empirical.n_min_observed < spec.n_min:
        raise DomainError(f"sample has values below the support n_min={spec.n_min}")
    v = empirical.values
    s_at = np.cumsum(empirical.multiplicities) / empirical.size
    s_before = np.concatenate(([0.0], s_at[:-1]))
    p_at = cdf(spec, v)
    p_before = cdf(spec, v - 1)
    return float(max(np.max(np.abs(s_at - p_at)), np.max(np.abs(s_before - p_before))))


def _replicate(family, spec, size, n_min, seed, index):
    """KS distance of one bootstrap replicate and whether its refit failed."""
    ks = math.nan
    for stream in (index + 1, (index + 1) | _RETRY_BIT):
        values = sample_values(spec, SeededRng(seed, stream), size)
        synth = CountSample.from_values(values)
        try:
            refit = fit(family, synth, n_min)
        except DegenerateDataError:
            continue
        ks = ks_distance(synth, refit.spec)
        if refit.converged:
            return ks, False
    return ks, True


def _run_block(args):
    family, spec, size, n_min, seed, indices = args
    return [_replicate(family, spec, size, n_min, seed, i) for i in indices]


def gof_test(
    family,
    data: CountSample,
    n_min: int | None = None,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> GofResult:
    """Bootstrap goodness-of-fit test of ``family`` on ``data``."""
    family = Family.parse(family)
    if isinstance(replicates, bool) or int(replicates) != replicates or replicates < 1:
        raise DomainError(f"replicates must be a positive integer, got {replicates!r}")
    replicates = int(replicates)
    SeededRng(seed)  # validates the seed
    fitted = fit(family, data, n_min)
    spec = fitted.spec
    observed = ks_distance(data, spec)

    size = data.size
    blocks = _blocks(replicates, workers)
    results: list = [None] * replicates
    tasks = [(family, spec, size, spec.n_min, seed, block) for block in blocks]
    done = 0
    if workers <= 1:
        outputs = map(_run_block, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        outputs = pool.map(_run_block, tasks)
    try:
        for block, out in zip(blocks, outputs):
            for i, res in zip(block, out):
                results[i] = res
            done += len(block)
            if progress is not None:
                progress(done, replicates)
    finally:
        if pool is not None:
            pool.shutdown()

    ks = np.array([r[0] for r in results])
    failed = tuple(i for i, r in enumerate(results) if r[1])
    if len(failed) > MAX_FAILED_SHARE * replicates:
        raise GofError(
            f"{len(failed)} of {replicates} replicate refits failed for {family.label}"
        )
    p_value = int(np.count_nonzero(ks > observed)) / replicates
    ks.flags.writeable = False
    return GofResult(observed, ks, p_value, replicates, int(seed), fitted, failed)


def _blocks(replicates, workers):
    # Small contiguous blocks keep progress reports regular; block layout
    # never affects the values computed.
    size = max(1, min(250, math.ceil(replicates / max(1, workers) / 4)))
    return [range(i, min(i + size, replicates)) for i in range(0, replicates, size)]


def format_p_value(p_value: float, replicates: int) -> str:
    """Percentage with two decimals; zero is shown as below the resolution."""
    if p_value == 0:
        return f"< 1/{replicates}"
    return f"{100 * p_value:.2f}%"
