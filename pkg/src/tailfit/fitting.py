"""Maximum-likelihood fits of the four families to a count sample.

One-parameter families are fitted with bounded Brent search (golden
section plus parabolic steps). The power law with cutoff is fitted by a
coarse grid scan over (beta, log gamma) followed by Nelder-Mead restarts
from the best grid cells. Every fit is numeric, so truncated supports
share one code path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .dataset import CountSample
from .distributions import Family, ModelSpec, _log_terms, _log_z, _plwc_log_tail, log_pmf
from .errors import DegenerateDataError, DomainError, NumericError

PARAM_TOL = 1e-6

# Search boxes.
SCALAR_BOUNDS = {
    Family.POWER_LAW: (1.001, 10.0),
    Family.YULE_SIMON: (1.001, 20.0),
    Family.EXPONENTIAL: (1e-6, 10.0),
}
BETA_BOUNDS = (1.001, 10.0)
BETA_RELAXED_MIN = 0.5  # allowed once gamma > GAMMA_RELAX
GAMMA_RELAX = 0.01
GAMMA_GRID_BOUNDS = (1e-6, 10.0)
# Refinement may go below the grid so that the pure power law (gamma -> 0)
# stays reachable to within ~1e-12 * N in log-likelihood.
GAMMA_BOUNDS = (1e-12, 10.0)

GRID_BETA = np.linspace(BETA_RELAXED_MIN, BETA_BOUNDS[1], 20)
GRID_LOG10_GAMMA = np.linspace(
    math.log10(GAMMA_GRID_BOUNDS[0]), math.log10(GAMMA_GRID_BOUNDS[1]), 22
)
N_RESTARTS = 3


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    log_likelihood: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def family(self) -> Family:
        return self.spec.family


def _check_support(data: CountSample, n_min: int):
    if data.n_min_observed < n_min:
        raise DomainError(
            f"sample contains value {data.n_min_observed} below support n_min={n_min}"
        )


def loglik(spec: ModelSpec, data: CountSample) -> float:
    """Sum of log-probabilities of every author's count under ``spec``."""
    _check_support(data, spec.n_min)
    return float(np.dot(data.multiplicities, log_pmf(spec, data.values)))


def _objective(family: Family, data: CountSample, n_min: int):
    """Negative log-likelihood as a function of the raw parameter tuple."""
    v = data.values.astype(float)
    m = data.multiplicities.astype(float)
    n_total = float(m.sum())
    if family is Family.POWER_LAW:
        s_log = float(np.dot(m, np.log(v)))
        return lambda p: p[0] * s_log + n_total * _log_z(family, p, n_min)
    if family is Family.POWER_LAW_CUTOFF:
        s_log = float(np.dot(m, np.log(v)))
        s_lin = float(np.dot(m, v))
        return lambda p: p[0] * s_log + p[1] * s_lin + n_total * _plwc_log_tail(p[0], p[1], n_min)
    if family is Family.EXPONENTIAL:
        s_lin = float(np.dot(m, v))
        return lambda p: p[0] * s_lin + n_total * _log_z(family, p, n_min)
    return lambda p: n_total * _log_z(family, p, n_min) - float(np.dot(m, _log_terms(family, p, v)))


def fit(family, data: CountSample, n_min: int | None = None) -> FitResult:
    """Maximum-likelihood fit of ``family`` to ``data`` on support >= n_min.

    ``n_min`` defaults to the smallest observed count. A fit that hits an
    iteration cap is returned with ``converged=False`` rather than raising.
    """
    family = Family.parse(family)
    if data is None or data.size == 0:
        raise DomainError("cannot fit an empty sample")
    n_min = data.n_min_observed if n_min is None else int(n_min)
    if n_min < 1:
        raise DomainError(f"n_min must be >= 1, got {n_min}")
    _check_support(data, n_min)
    if family is Family.POWER_LAW_CUTOFF:
        params, iterations, converged, diag = _fit_cutoff(data, n_min)
    else:
        params, iterations, converged, diag = _fit_scalar(family, data, n_min)
    spec = ModelSpec(family, params, n_min)
    return FitResult(spec, loglik(spec, data), iterations, converged, diag)


def _fit_scalar(family, data, n_min):
    lo, hi = SCALAR_BOUNDS[family]
    neg = _objective(family, data, n_min)
    res = optimize.minimize_scalar(
        lambda x: neg((x,)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": PARAM_TOL, "maxiter": 500},
    )
    # Brent never probes the end points; compare them explicitly so that
    # boundary maxima are reported exactly. Ties go to the smaller value.
    candidates = sorted(
        [(float(res.fun), float(res.x)), (neg((lo,)), lo), (neg((hi,)), hi)],
        key=lambda c: (c[0], c[1]),
    )
    best_f, best_x = candidates[0]
    diag = {
        "bracket": [lo, hi],
        "tolerance": PARAM_TOL,
        "evaluations": int(res.nfev),
        "at_bound": best_x in (lo, hi) or min(best_x - lo, hi - best_x) < 10 * PARAM_TOL,
    }
    return (best_x,), int(res.nit), bool(res.success), diag


def _beta_min(gamma):
    return BETA_RELAXED_MIN if gamma > GAMMA_RELAX else BETA_BOUNDS[0]


def _in_box(beta, gamma):
    return (
        GAMMA_BOUNDS[0] <= gamma <= GAMMA_BOUNDS[1]
        and _beta_min(gamma) <= beta <= BETA_BOUNDS[1]
    )


def cutoff_grid(data: CountSample, n_min: int | None = None) -> list[tuple[float, float, float]]:
    """Log-likelihood over the coarse (beta, gamma) grid used to seed the fit.

    Returns (loglik, beta, gamma) triples for every admissible grid cell.
    """
    n_min = data.n_min_observed if n_min is None else int(n_min)
    neg = _objective(Family.POWER_LAW_CUTOFF, data, n_min)
    out = []
    for lg in GRID_LOG10_GAMMA:
        gamma = float(10.0**lg)
        for beta in GRID_BETA:
            beta = float(beta)
            if _in_box(beta, gamma):
                out.append((-neg((beta, gamma)), beta, gamma))
    return out


def _fit_cutoff(data, n_min):
    if data.values.size == 1 and data.values[0] == n_min:
        raise DegenerateDataError(
            "every count equals n_min; the cutoff likelihood increases without bound in gamma"
        )
    neg = _objective(Family.POWER_LAW_CUTOFF, data, n_min)

    def neg_log_space(x):
        beta, gamma = float(x[0]), 10.0 ** float(x[1])
        if not _in_box(beta, gamma):
            return math.inf
        try:
            return neg((beta, gamma))
        except NumericError:
            return math.inf

    grid = cutoff_grid(data, n_min)
    ranked = sorted(grid, key=lambda g: (-g[0], g[1], g[2]))
    d_beta = float(GRID_BETA[1] - GRID_BETA[0])
    d_lg = float(GRID_LOG10_GAMMA[1] - GRID_LOG10_GAMMA[0])

    runs = []
    for ll0, beta0, gamma0 in ranked[:N_RESTARTS]:
        x0 = np.array([beta0, math.log10(gamma0)])
        simplex = np.array([x0, x0 + [d_beta / 2, 0.0], x0 + [0.0, d_lg / 2]])
        # keep the starting simplex inside the box
        simplex[:, 0] = np.clip(simplex[:, 0], _beta_min(gamma0), BETA_BOUNDS[1])
        simplex[:, 1] = np.clip(simplex[:, 1], math.log10(GAMMA_BOUNDS[0]), GRID_LOG10_GAMMA[-1])
        res = optimize.minimize(
            neg_log_space,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": PARAM_TOL / 10,
                "fatol": 1e-9 * max(1.0, abs(ll0)),
                "maxiter": 4000,
                "maxfev": 8000,
            },
        )
        runs.append(res)

    def key(res):
        return (float(res.fun), float(res.x[0]), float(res.x[1]))

    best = min(runs, key=key)
    beta, gamma = float(best.x[0]), 10.0 ** float(best.x[1])
    diag = {
        "grid_best": list(ranked[0]),
        "grid_cells": len(grid),
        "restarts": [
            {"beta": float(r.x[0]), "gamma": 10.0 ** float(r.x[1]), "log_likelihood": -float(r.fun)}
            for r in runs
        ],
        "final_simplex": best.final_simplex[0].tolist(),
        "tolerance": PARAM_TOL,
        "at_bound": not _in_box(beta * (1 + 1e-6), gamma * (1 + 1e-5))
        or not _in_box(beta * (1 - 1e-6), gamma * (1 - 1e-5)),
    }
    return (beta, gamma), int(sum(r.nit for r in runs)), bool(best.success), diag
