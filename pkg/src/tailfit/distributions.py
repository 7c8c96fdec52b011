"""Discrete heavy-tailed families on the support {n_min, n_min + 1, ...}.

Four families are provided:

* power law              p(n) ~ n**-alpha
* power law with cutoff  p(n) ~ n**-beta * exp(-gamma * n)
* Yule-Simon             p(n) ~ (rho - 1) * B(n, rho)
* exponential            p(n) ~ exp(-lambda * n)

Every family is renormalized over its support, so a truncated sample
(authors below some count discarded) is modelled by raising ``n_min``.
All probability arithmetic is done in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, NumericError

# Cumulative tables for the cutoff family stop here; beyond it the CDF is
# evaluated from the tail sum directly.
CDF_TABLE_CAP = 1 << 18

_SERIES_CHUNK = 1024
_SERIES_CAP = 10**8
# Relative size of the neglected remainder that ends a direct summation.
_SERIES_RTOL = 1e-16
# Relative size of the first omitted Euler-Maclaurin term that is accepted.
_EM_RTOL = 1e-14


class Family(str, Enum):
    POWER_LAW = "pl"
    POWER_LAW_CUTOFF = "plwc"
    YULE_SIMON = "ys"
    EXPONENTIAL = "exp"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        """Look up a family by short code or by a spelled-out name."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-").replace(" ", "-")
        try:
            return _ALIASES[key]
        except KeyError:
            raise DomainError(f"unknown distribution family {name!r}") from None

    @property
    def param_names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self]

    @property
    def label(self) -> str:
        return _LABELS[self]


_PARAM_NAMES = {
    Family.POWER_LAW: ("alpha",),
    Family.POWER_LAW_CUTOFF: ("beta", "gamma"),
    Family.YULE_SIMON: ("rho",),
    Family.EXPONENTIAL: ("lambda",),
}

_LABELS = {
    Family.POWER_LAW: "power law",
    Family.POWER_LAW_CUTOFF: "power law with cutoff",
    Family.YULE_SIMON: "Yule-Simon",
    Family.EXPONENTIAL: "exponential",
}

_ALIASES = {
    "pl": Family.POWER_LAW,
    "power-law": Family.POWER_LAW,
    "powerlaw": Family.POWER_LAW,
    "plwc": Family.POWER_LAW_CUTOFF,
    "plc": Family.POWER_LAW_CUTOFF,
    "power-law-cutoff": Family.POWER_LAW_CUTOFF,
    "power-law-with-cutoff": Family.POWER_LAW_CUTOFF,
    "truncated-power-law": Family.POWER_LAW_CUTOFF,
    "ys": Family.YULE_SIMON,
    "yule-simon": Family.YULE_SIMON,
    "yule": Family.YULE_SIMON,
    "exp": Family.EXPONENTIAL,
    "exponential": Family.EXPONENTIAL,
    "geometric": Family.EXPONENTIAL,
}


@dataclass(frozen=True)
class ModelSpec:
    """A fully parametrized distribution.

    ``params`` holds (alpha,), (beta, gamma), (rho,) or (lambda,) depending on
    ``family``. Instances are immutable and validated on construction.
    """

    family: Family
    params: tuple[float, ...]
    n_min: int = 1

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        params = tuple(float(p) for p in np.atleast_1d(self.params))
        object.__setattr__(self, "params", params)
        if isinstance(self.n_min, bool) or int(self.n_min) != self.n_min:
            raise DomainError(f"n_min must be an integer, got {self.n_min!r}")
        object.__setattr__(self, "n_min", int(self.n_min))
        if self.n_min < 1:
            raise DomainError(f"n_min must be >= 1, got {self.n_min}")
        if len(params) != len(family.param_names):
            raise DomainError(
                f"{family.label} takes {len(family.param_names)} parameter(s), got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise DomainError(f"non-finite parameters {params} for {family.label}")
        _check_params(family, params)

    @classmethod
    def power_law(cls, alpha, n_min=1):
        return cls(Family.POWER_LAW, (alpha,), n_min)

    @classmethod
    def power_law_cutoff(cls, beta, gamma, n_min=1):
        return cls(Family.POWER_LAW_CUTOFF, (beta, gamma), n_min)

    @classmethod
    def yule_simon(cls, rho, n_min=1):
        return cls(Family.YULE_SIMON, (rho,), n_min)

    @classmethod
    def exponential(cls, lam, n_min=1):
        return cls(Family.EXPONENTIAL, (lam,), n_min)

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(zip(self.family.param_names, self.params))

    def with_params(self, *params) -> "ModelSpec":
        return ModelSpec(self.family, params, self.n_min)

    def __str__(self):
        args = ", ".join(f"{k}={v:.6g}" for k, v in self.param_dict.items())
        return f"{self.family.value}({args}; n_min={self.n_min})"


def _check_params(family, params):
    if family is Family.POWER_LAW and not params[0] > 1:
        raise DomainError(f"power law requires alpha > 1, got {params[0]}")
    if family is Family.POWER_LAW_CUTOFF and not params[1] > 0:
        raise DomainError(f"power law with cutoff requires gamma > 0, got {params[1]}")
    if family is Family.YULE_SIMON and not params[0] > 1:
        raise DomainError(f"Yule-Simon requires rho > 1, got {params[0]}")
    if family is Family.EXPONENTIAL and not params[0] > 0:
        raise DomainError(f"exponential requires lambda > 0, got {params[0]}")


# ---------------------------------------------------------------------------
# special functions


def log_beta(x, y):
    """Logarithm of the Euler beta function B(x, y) for x, y > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("log_beta requires positive arguments")
    out = _betaln(x, y)
    return float(out) if out.ndim == 0 else out


_STIRLING_MIN = 30.0


def _stirling_tail(z):
    # lgamma(z) minus its leading Stirling terms; next term < 1e-16 for z >= 30
    z2 = z * z
    return (1 / 12 - (1 / 360 - (1 / 1260 - 1 / (1680 * z2)) / z2) / z2) / z


def _log_gamma_ratio(x, a):
    """lgamma(x) - lgamma(x + a) for x >= 30, a > 0, without cancellation."""
    return (
        -(x + a - 0.5) * np.log1p(a / x)
        - a * np.log(x)
        + a
        + _stirling_tail(x)
        - _stirling_tail(x + a)
    )


def _betaln(x, y):
    # scipy's betaln drifts to ~1e-10 relative once an argument is large;
    # there the difference of Stirling series is evaluated directly.
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    big = np.maximum(x, y)
    small = np.minimum(x, y)
    large = big >= _STIRLING_MIN
    if not np.any(large):
        return special.betaln(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        via_stirling = special.gammaln(small) + _log_gamma_ratio(np.maximum(big, _STIRLING_MIN), small)
    return np.where(large, via_stirling, special.betaln(x, y))


def _log_upper_gamma(a: float, x: float) -> float:
    """log Gamma(a, x) for real ``a`` (any sign) and x > 0."""
    if x <= 0:
        raise DomainError("upper incomplete gamma needs x > 0")
    if a > 0:
        q = special.gammaincc(a, x)
        if q > 1e-280:
            return math.log(q) + special.gammaln(a)
        return _log_upper_gamma_cf(a, x)
    if x >= 2.0:
        return _log_upper_gamma_cf(a, x)
    # Gamma(a, x) = int_x^2 t^(a-1) e^-t dt + Gamma(a, 2), with e^-t expanded.
    log_ratio = math.log(2.0 / x)
    total = 0.0
    term_scale = 1.0  # (-1)^k / k!
    for k in range(200):
        c = a + k
        if c == 0:
            piece = log_ratio
        else:
            piece = math.exp(c * math.log(x)) * math.expm1(c * log_ratio) / c
        contrib = term_scale * piece
        total += contrib
        if k > 2 and abs(contrib) < 1e-17 * abs(total):
            break
        term_scale *= -1.0 / (k + 1)
    total += math.exp(_log_upper_gamma_cf(a, 2.0))
    return math.log(total)


def _log_upper_gamma_cf(a: float, x: float) -> float:
    # Modified Lentz evaluation of the Legendre continued fraction; needs x > a - 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise NumericError(f"incomplete gamma continued fraction stalled at a={a}, x={x}")
    return -x + a * math.log(x) + math.log(h)


def _rising(b: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= b + i
    return out


def _plwc_em_tail(beta, gamma, m, ref):
    """Euler-Maclaurin tail sum_{n >= m} n^-beta e^-(gamma n), scaled by e^-ref.

    Returns (value, magnitude of the first omitted correction).
    """
    log_integral = (beta - 1.0) * math.log(gamma) + _log_upper_gamma(1.0 - beta, gamma * m)
    f_m = math.exp(-beta * math.log(m) - gamma * m - ref)

    def deriv(order):
        # Leibniz rule on m^-beta * e^(-gamma m), relative to f(m).
        s = sum(
            math.comb(order, j) * _rising(beta, j) * m ** (-j) * gamma ** (order - j)
            for j in range(order + 1)
        )
        return (-1) ** order * s * f_m

    value = (
        math.exp(log_integral - ref)
        + f_m / 2.0
        - deriv(1) / 12.0
        + deriv(3) / 720.0
        - deriv(5) / 30240.0
    )
    return value, abs(deriv(7)) / 1209600.0


def _plwc_log_tail(beta: float, gamma: float, start: int) -> float:
    """log of sum_{n >= start} n^-beta * exp(-gamma n), for gamma > 0."""

    def logf(n):
        return -beta * np.log(n) - gamma * n

    peak = -beta / gamma if beta < 0 else 0.0
    ref = float(logf(float(start)))
    if peak > start:
        ref = max(ref, float(logf(math.floor(peak))), float(logf(math.ceil(peak))))

    total = 0.0
    n0 = start
    while True:
        n = np.arange(n0, n0 + _SERIES_CHUNK, dtype=float)
        total += float(np.exp(logf(n) - ref).sum())
        n0 += _SERIES_CHUNK
        if n0 > peak:
            # terms are decreasing from n0 on, with ratio at most r
            r = math.exp(max(0.0, -beta) * math.log1p(1.0 / n0) - gamma)
            first_omitted = math.exp(float(logf(float(n0))) - ref)
            if r < 1.0 and first_omitted / (1.0 - r) < _SERIES_RTOL * total:
                return ref + math.log(total)
            tail, err = _plwc_em_tail(beta, gamma, n0, ref)
            if tail >= 0 and err < _EM_RTOL * (total + tail):
                return ref + math.log(total + tail)
        if n0 - start > _SERIES_CAP:
            raise NumericError(
                f"series for power law with cutoff (beta={beta}, gamma={gamma}, "
                f"start={start}) did not converge within {_SERIES_CAP} terms"
            )


# ---------------------------------------------------------------------------
# normalizers and pmf


def _log_z(family: Family, params: tuple, n_min: int) -> float:
    if family is Family.POWER_LAW:
        return math.log(special.zeta(params[0], n_min))
    if family is Family.POWER_LAW_CUTOFF:
        return _plwc_log_tail(params[0], params[1], n_min)
    if family is Family.YULE_SIMON:
        if n_min == 1:
            return 0.0
        # P(X >= m) = (m - 1) B(m - 1, rho) on the full support
        return math.log(n_min - 1) + float(_betaln(np.float64(n_min - 1), np.float64(params[0])))
    lam = params[0]
    return -lam * n_min - math.log(-math.expm1(-lam))


def _log_terms(family: Family, params: tuple, n):
    """Unnormalized log-probabilities at integer array ``n``."""
    if family is Family.POWER_LAW:
        return -params[0] * np.log(n)
    if family is Family.POWER_LAW_CUTOFF:
        return -params[0] * np.log(n) - params[1] * n
    if family is Family.YULE_SIMON:
        return math.log(params[0] - 1.0) + _betaln(n, np.float64(params[0]))
    return -params[0] * n


def log_normalizer(spec: ModelSpec) -> float:
    """log Z, where Z is the sum of the unnormalized pmf over the support."""
    return _log_z(spec.family, spec.params, spec.n_min)


def _as_support(spec, n):
    arr = np.asarray(n)
    if arr.dtype.kind not in "iuf":
        raise DomainError("counts must be numeric")
    if np.any(arr < spec.n_min):
        raise DomainError(f"value below support n_min={spec.n_min} for {spec}")
    return arr.astype(float)


def log_pmf(spec: ModelSpec, n):
    """Log probability mass at ``n`` (scalar or array), all n >= n_min."""
    arr = _as_support(spec, n)
    out = _log_terms(spec.family, spec.params, arr) - log_normalizer(spec)
    return float(out) if np.ndim(out) == 0 else out


def pmf(spec: ModelSpec, n):
    return np.exp(log_pmf(spec, n))


def log_sf(spec: ModelSpec, n):
    """log P(X > n). Values of ``n`` below the support give 0."""
    arr = np.asarray(n, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros(arr.shape)
    inside = arr >= spec.n_min
    m = arr[inside]
    fam, p = spec.family, spec.params
    log_z = log_normalizer(spec)
    if fam is Family.POWER_LAW:
        with np.errstate(divide="ignore"):
            vals = np.log(special.zeta(p[0], m + 1.0)) - log_z
    elif fam is Family.YULE_SIMON:
        vals = np.log(m) + _betaln(m, np.float64(p[0])) - log_z
    elif fam is Family.EXPONENTIAL:
        vals = -p[0] * (m - spec.n_min + 1.0)
    else:
        vals = np.array([_plwc_log_tail(p[0], p[1], int(v) + 1) for v in m]) - log_z
    out[inside] = np.minimum(vals, 0.0)
    return float(out[0]) if scalar else out


@lru_cache(maxsize=256)
def _cumulative_table(spec: ModelSpec, length: int) -> np.ndarray:
    n = np.arange(spec.n_min, spec.n_min + length, dtype=float)
    table = np.cumsum(np.exp(_log_terms(spec.family, spec.params, n) - log_normalizer(spec)))
    table = np.minimum(table, 1.0)
    table.flags.writeable = False
    return table


def _table_length(needed: int) -> int:
    length = 256
    while length < needed:
        length *= 2
    return length


def cdf(spec: ModelSpec, n):
    """P(X <= n); zero below the support, nondecreasing, tends to 1."""
    arr = np.asarray(n, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros(arr.shape)
    inside = arr >= spec.n_min
    if spec.family is not Family.POWER_LAW_CUTOFF:
        out[inside] = -np.expm1(log_sf(spec, arr[inside]))
    else:
        offset = arr - spec.n_min
        in_table = inside & (offset < CDF_TABLE_CAP)
        if np.any(in_table):
            idx = offset[in_table].astype(np.int64)
            table = _cumulative_table(spec, _table_length(int(idx.max()) + 1))
            out[in_table] = table[idx]
        far = inside & ~in_table
        if np.any(far):
            out[far] = -np.expm1(log_sf(spec, arr[far]))
    return float(out[0]) if scalar else out
