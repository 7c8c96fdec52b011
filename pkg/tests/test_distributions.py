import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from tailfit import DomainError, Family, ModelSpec, cdf, log_beta, log_normalizer, log_pmf, log_sf, pmf

# Frozen oracle values, computed with mpmath at 40 digits: explicit head sums
# plus Euler-Maclaurin remainders for the series, adaptive quadrature for the
# beta integral.
Z_PLWC_228_005 = 1.3101657177297852674
PMF_PLWC_23_006_N3_AT_10 = 0.017312344336862323866
CDF_PL25_AT_100 = 0.99950675081266954827
LOG_BETA_75_349 = -6.356576998360135776


def total_mass(spec, horizon=200_000):
    n = np.arange(spec.n_min, spec.n_min + horizon)
    return float(np.sum(pmf(spec, n))) + math.exp(log_sf(spec, spec.n_min + horizon - 1))


# -- ModelSpec ---------------------------------------------------------------


@pytest.mark.parametrize(
    "family,params,n_min",
    [
        (Family.POWER_LAW, (1.0,), 1),
        (Family.POWER_LAW_CUTOFF, (2.0, 0.0), 1),
        (Family.YULE_SIMON, (1.0,), 1),
        (Family.EXPONENTIAL, (0.0,), 1),
        (Family.POWER_LAW, (2.0,), 0),
        (Family.POWER_LAW, (2.0, 3.0), 1),
    ],
)
def test_invalid_specs_raise(family, params, n_min):
    with pytest.raises(DomainError):
        ModelSpec(family, params, n_min)


def test_cutoff_accepts_any_beta():
    ModelSpec.power_law_cutoff(-1.5, 0.2)
    ModelSpec.power_law_cutoff(0.5, 0.2)


def test_family_aliases():
    assert Family.parse("yule-simon") is Family.YULE_SIMON
    assert Family.parse("PL") is Family.POWER_LAW
    with pytest.raises(DomainError):
        Family.parse("lognormal")


# -- log_normalizer -----------------------------------------------------------


def test_normalizer_power_law_zeta2():
    assert math.exp(log_normalizer(ModelSpec.power_law(2.0))) == pytest.approx(math.pi**2 / 6, rel=1e-14)


def test_normalizer_yule_simon_is_one():
    assert log_normalizer(ModelSpec.yule_simon(3.0)) == pytest.approx(0.0, abs=1e-15)


def test_normalizer_cutoff_oracle():
    z = math.exp(log_normalizer(ModelSpec.power_law_cutoff(2.28, 0.05)))
    assert z == pytest.approx(Z_PLWC_228_005, rel=1e-13)


def test_normalizer_exponential_closed_form():
    lam, n0 = 0.7, 4
    z = math.exp(-lam * n0) / (1 - math.exp(-lam))
    assert math.exp(log_normalizer(ModelSpec.exponential(lam, n0))) == pytest.approx(z, rel=1e-14)


@pytest.mark.parametrize("gamma", [1e-4, 1e-6, 1e-9])
def test_normalizer_small_gamma_tail(gamma):
    # tiny gamma: the series needs far more terms than the direct sum
    # can take, so this exercises the remainder formula; compare with the
    # gamma -> 0 limit zeta(beta) minus the first-order correction
    beta = 2.5
    z = math.exp(log_normalizer(ModelSpec.power_law_cutoff(beta, gamma)))
    approx = zeta(beta) - gamma * zeta(beta - 1)
    assert z == pytest.approx(approx, rel=5 * gamma**1.4)


# -- log_pmf ---------------------------------------------------------------------


def test_pmf_trivial_values():
    assert pmf(ModelSpec.yule_simon(3.0), 1) == pytest.approx(2 / 3, rel=1e-14)
    assert pmf(ModelSpec.power_law(2.0), 2) == pytest.approx(0.25 / (math.pi**2 / 6), rel=1e-14)


def test_pmf_cutoff_truncated_oracle():
    spec = ModelSpec.power_law_cutoff(2.3, 0.06, n_min=3)
    assert pmf(spec, 10) == pytest.approx(PMF_PLWC_23_006_N3_AT_10, rel=1e-12)


def test_log_pmf_below_support():
    with pytest.raises(DomainError):
        log_pmf(ModelSpec.power_law(2.0, n_min=3), 2)


def test_log_pmf_vectorized_matches_scalar():
    spec = ModelSpec.yule_simon(2.4, n_min=2)
    n = np.array([2, 5, 40, 1000])
    assert np.allclose(log_pmf(spec, n), [log_pmf(spec, int(k)) for k in n], rtol=0, atol=1e-13)


# -- cdf -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec.power_law(2.0, 2),
        ModelSpec.power_law_cutoff(2.0, 0.1, 3),
        ModelSpec.yule_simon(3.0, 2),
        ModelSpec.exponential(1.0, 5),
    ],
)
def test_cdf_below_support_is_zero(spec):
    assert cdf(spec, spec.n_min - 1) == 0.0


def test_cdf_geometric_closed_form():
    assert cdf(ModelSpec.exponential(1.0), 1) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    for n in (2, 7, 30):
        assert cdf(ModelSpec.exponential(0.3), n) == pytest.approx(1 - math.exp(-0.3 * n), abs=1e-14)


def test_cdf_power_law_oracle():
    assert cdf(ModelSpec.power_law(2.5), 100) == pytest.approx(CDF_PL25_AT_100, abs=1e-14)


def test_cdf_beyond_table_is_consistent():
    spec = ModelSpec.power_law_cutoff(1.5, 1e-5)
    n = np.array([10, 1 << 17, (1 << 18) - 1, 1 << 18, (1 << 18) + 1, 1 << 20])
    c = cdf(spec, n)
    assert np.all(np.diff(c) >= 0)
    assert np.allclose(c, 1 - np.exp([log_sf(spec, int(k)) for k in n]), rtol=0, atol=1e-12)


# -- log_beta ----------------------------------------------------------------------


def test_log_beta_trivial():
    assert log_beta(1, 5) == pytest.approx(math.log(1 / 5), abs=1e-15)
    assert log_beta(2, 3) == pytest.approx(math.log(1 / 12), abs=1e-15)


def test_log_beta_quadrature_oracle():
    assert log_beta(7.5, 3.49) == pytest.approx(LOG_BETA_75_349, rel=1e-13)


def test_log_beta_large_arguments_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for x, y in [(1e6, 3.5), (1e6, 1e6), (2.5e5, 0.1), (17.0, 9.9e5)]:
        exact = float(mp.log(mp.beta(x, y)))
        assert log_beta(x, y) == pytest.approx(exact, rel=1e-12)


def test_log_beta_domain():
    with pytest.raises(DomainError):
        log_beta(0, 1)
    with pytest.raises(DomainError):
        log_beta(1, -2)


# -- properties --------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec.power_law(2.2, 1),
        ModelSpec.power_law(3.5, 4),
        ModelSpec.power_law_cutoff(2.0, 0.01, 1),
        ModelSpec.power_law_cutoff(0.8, 0.2, 2),
        ModelSpec.yule_simon(2.5, 1),
        ModelSpec.yule_simon(4.0, 3),
        ModelSpec.exponential(0.2, 2),
    ],
)
def test_cdf_pmf_consistency(spec):
    n = np.arange(spec.n_min, spec.n_min + 500)
    diff = cdf(spec, n) - cdf(spec, n - 1)
    assert np.max(np.abs(diff - pmf(spec, n))) < 1e-12


def test_cutoff_degenerates_to_power_law():
    # the exact gap is gamma * n plus a normalizer shift, so stay at n <= 100
    n = np.arange(1, 101)
    pl = log_pmf(ModelSpec.power_law(2.3), n)
    plwc = log_pmf(ModelSpec.power_law_cutoff(2.3, 1e-8), n)
    assert np.max(np.abs(pl - plwc)) < 1e-6


@given(
    rho=st.floats(1.01, 20.0),
    n=st.integers(1, 10_000),
    n_min=st.integers(1, 5),
)
def test_yule_simon_ratio(rho, n, n_min):
    spec = ModelSpec.yule_simon(rho, n_min)
    n = max(n, n_min)
    ratio = log_pmf(spec, n + 1) - log_pmf(spec, n)
    assert ratio == pytest.approx(math.log(n / (n + rho)), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    family=st.sampled_from(list(Family)),
    p1=st.floats(1.3, 4.0),
    gamma=st.floats(0.005, 0.5),
    n_min=st.integers(1, 4),
)
def test_normalization_property(family, p1, gamma, n_min):
    if family is Family.POWER_LAW_CUTOFF:
        spec = ModelSpec(family, (p1, gamma), n_min)
    elif family is Family.EXPONENTIAL:
        spec = ModelSpec(family, (gamma,), n_min)
    else:
        spec = ModelSpec(family, (p1,), n_min)
    assert abs(total_mass(spec) - 1) < 1e-9


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(1.2, 5.0), n_min=st.integers(1, 6), n=st.integers(0, 10**6))
def test_cdf_monotone_and_bounded(alpha, n_min, n):
    spec = ModelSpec.power_law(alpha, n_min)
    a, b = cdf(spec, n), cdf(spec, n + 1)
    assert 0.0 <= a <= b <= 1.0
