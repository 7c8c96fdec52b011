import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailfit import (
    CountSample,
    DomainError,
    EventLog,
    Family,
    FitResult,
    Histogram,
    ModelSpec,
    detect_peaks,
    fit,
    joint_histogram,
    key_players,
    log_normalizer,
    n_max,
    pmf,
    pref_attach_rates,
)

# N_J = 63791, alpha = 2.58, n_min = 3: C_1 from a direct sum of n**-2.58
# over 3 <= n < 1e5 plus an Euler-Maclaurin remainder (mpmath, 40 digits)
N_MAX_63791_258_3 = 153.93297324553142586


def pl_fit(alpha, n_min=1):
    return FitResult(ModelSpec.power_law(alpha, n_min), 0.0, 0, True)


# -- n_max ------------------------------------------------------------------------


def test_n_max_square_root():
    spec = ModelSpec.power_law(2.0)
    n_authors = 1000 * math.exp(log_normalizer(spec))
    assert n_max(n_authors, spec) == pytest.approx(math.sqrt(1000), abs=1e-9)


def test_n_max_truncated_oracle():
    assert n_max(63_791, ModelSpec.power_law(2.58, 3)) == pytest.approx(N_MAX_63791_258_3, rel=1e-12)


def test_n_max_errors():
    with pytest.raises(DomainError):
        n_max(100, ModelSpec.power_law(1.0))
    with pytest.raises(DomainError):
        n_max(100, ModelSpec.yule_simon(2.0))
    with pytest.raises(DomainError):
        n_max(0, ModelSpec.power_law(2.0))


def test_n_max_monotone_on_grid():
    alphas = np.linspace(1.5, 3.5, 21)
    sizes = np.array([10, 100, 1000, 10**4, 10**5, 10**6])
    by_size = np.array([[n_max(int(s), ModelSpec.power_law(a)) for a in alphas] for s in sizes])
    assert np.all(np.diff(by_size, axis=0) > 0)
    # decreasing in alpha once N_J * C_1 is held fixed
    products = [10.0, 1e3, 1e5]
    by_alpha = np.array([
        [n_max(k * math.exp(log_normalizer(ModelSpec.power_law(a))), ModelSpec.power_law(a)) for a in alphas]
        for k in products
    ])
    assert np.all(np.diff(by_alpha, axis=1) < 0)


# -- key players -------------------------------------------------------------------


def test_key_players_none_above():
    data = CountSample.from_counts({1: 900, 5: 90, 10: 10})
    report = key_players(data, pl_fit(2.0))
    assert report.exceeders == [] and report.N_J == 1000


def test_key_players_planted_outliers():
    spec = ModelSpec.power_law(2.5)
    n = np.arange(1, 51)
    background = {int(k): int(c) for k, c in zip(n, np.floor(100_000 * pmf(spec, n))) if c > 0}
    bound = n_max(sum(background.values()), fit(Family.POWER_LAW, CountSample.from_counts(background)).spec)
    planted = [int(5 * bound) + i for i in range(3)]
    data = CountSample.from_counts({**background, **{p: 1 for p in planted}})
    report = key_players(data, fit(Family.POWER_LAW, data))
    assert [v for v, _ in report.exceeders] == planted
    assert all(v > report.n_max for v, _ in report.exceeders)


def test_key_players_strict_boundary():
    # N = 1000, alpha = 2: n_max = sqrt(1000 * 6 / pi**2) = 24.66
    data = CountSample.from_counts({1: 998, 24: 1, 25: 1})
    report = key_players(data, pl_fit(2.0))
    assert 24 < report.n_max < 25
    assert report.exceeders == [(25, 1)]


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(1.2, 4.0), counts=st.dictionaries(st.integers(1, 500), st.integers(1, 50), min_size=1))
def test_key_players_strictly_above(alpha, counts):
    data = CountSample.from_counts(counts)
    report = key_players(data, pl_fit(alpha))
    assert [v for v, _ in report.exceeders] == [v for v in sorted(counts) if v > report.n_max]


def test_key_players_raised_ceiling_empties_report(monkeypatch):
    import tailfit.analysis as analysis

    data = CountSample.from_counts({1: 500, 7: 3, 90: 1})
    monkeypatch.setattr(analysis, "n_max", lambda n, spec: 90.0)
    assert key_players(data, pl_fit(2.0)).exceeders == []
    monkeypatch.setattr(analysis, "n_max", lambda n, spec: 89.999)
    assert key_players(data, pl_fit(2.0)).exceeders == [(90, 1)]


# -- joint histogram ---------------------------------------------------------------


def test_joint_histogram_trivial():
    assert joint_histogram({"a": 1}, {"b": 2}).bins == {}
    assert joint_histogram({"a": 4}, {"a": 7}).bins == {(4, 7): 1}


def test_joint_histogram_ranges():
    a = {"x": 5, "y": 50, "z": 70}
    b = {"x": 5, "y": 80, "z": 90}
    h = joint_histogram(a, b, (40, 100), (60, 100))
    assert h.bins == {(50, 80): 1, (70, 90): 1}
    assert h.rows() == [(50, 80, 1), (70, 90, 1)]


@given(
    st.dictionaries(st.sampled_from("abcdefghij"), st.integers(1, 5)),
    st.dictionaries(st.sampled_from("abcdefghij"), st.integers(1, 5)),
)
def test_joint_histogram_total(a, b):
    h = joint_histogram(a, b)
    assert h.total == len(set(a) & set(b))
    assert h.total <= min(len(a), len(b))


# -- peaks -------------------------------------------------------------------------


def test_peaks_monotone():
    assert detect_peaks(Histogram({k: 1000 // k for k in range(1, 200)}, False)) == []


def test_peaks_single_spike():
    bins = {k: 5 for k in range(1, 101)}
    bins[40] = 60
    assert detect_peaks(Histogram(bins, False)) == [(40, 60.0)]


def test_peaks_two_gaussian_bumps():
    bins = {
        k: round(1e6 * k**-2.0 + 5000 * math.exp(-((k - 66) ** 2) / 18) + 3000 * math.exp(-((k - 96) ** 2) / 18))
        for k in range(1, 151)
    }
    peaks = detect_peaks(Histogram(bins, False), window=10, min_prominence=3)
    assert [v for v, _ in peaks] == [66, 96]


def test_peaks_treat_gaps_as_empty():
    assert detect_peaks(Histogram({1: 1, 30: 8, 60: 1}, False)) == [(30, 8.0)]


def test_peaks_window_validation():
    with pytest.raises(DomainError):
        detect_peaks(Histogram({1: 1}, False), window=0)


# -- preferential attachment -------------------------------------------------------


def test_rates_one_author_one_event_per_year():
    log = EventLog.from_events([("a", y) for y in range(2000, 2010)])
    res = pref_attach_rates(log, (2001, 2009))
    assert all(p.rate == 1 for p in res.points)
    assert not res.r_defined and math.isnan(res.pearson_r) and res.note


def test_rates_exact_linear_process():
    events = []
    for author, k in enumerate([1, 2, 3, 5, 8]):
        total = k
        events += [(f"a{author}", 2000)] * k
        for year in (2001, 2002, 2003):
            events += [(f"a{author}", year)] * total
            total *= 2
    res = pref_attach_rates(EventLog.from_events(events), (2001, 2003))
    assert all(p.rate == p.k for p in res.points)
    assert res.pearson_r == pytest.approx(1.0, abs=1e-12)


def test_rates_simulated_process(sim_log):
    res = pref_attach_rates(sim_log, (1995, 2009))
    assert res.r_defined and res.pearson_r > 0.9


def test_rates_inactive_flag():
    log = EventLog.from_events([("a", 2000), ("b", 2000), ("a", 2001)])
    active = pref_attach_rates(log, (2001, 2001))
    everyone = pref_attach_rates(log, (2001, 2001), include_inactive=True)
    assert [(p.k, p.N_k, p.m_k) for p in active.points] == [(1, 1, 1)]
    assert [(p.k, p.N_k, p.m_k) for p in everyone.points] == [(1, 2, 1)]


def test_rates_errors():
    log = EventLog.from_events([("a", 2000), ("a", 2001)])
    with pytest.raises(DomainError):
        pref_attach_rates(log, (2005, 2001))
    with pytest.raises(DomainError):
        pref_attach_rates(log, (2000, 2001))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcdefg"), st.integers(1990, 2000)), min_size=2, max_size=80))
def test_rates_conservation(events):
    log = EventLog.from_events(events)
    first = 1995
    if not any(y < first for _, y in events):
        return
    res = pref_attach_rates(log, (first, 2000))
    for t in range(first, 2001):
        prior = {a for a, y in events if y < t}
        expected = sum(1 for a, y in events if y == t and a in prior)
        assert sum(p.m_k for p in res.points if p.t == t) == expected
    assert all(p.N_k >= 1 and p.rate >= 0 for p in res.points)
