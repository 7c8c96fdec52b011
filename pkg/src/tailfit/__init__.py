"""Fit, test and analyze heavy-tailed distributions of publication counts."""
from .analysis import (
    Histogram2D,
    KeyPlayerReport,
    PrefAttachResult,
    RatePoint,
    detect_peaks,
    joint_histogram,
    key_players,
    n_max,
    pref_attach_rates,
)
from .dataset import (
    CountSample,
    EventLog,
    Histogram,
    count_histogram,
    empirical_cdf,
    load_author_counts,
    load_counts,
    load_events,
    proportion_histogram,
    reduce_by_year,
    truncate_min,
)
from .distributions import Family, ModelSpec, cdf, log_beta, log_normalizer, log_pmf, log_sf, pmf
from .errors import DegenerateDataError, DomainError, GofError, NumericError, ParseError, TailfitError
from .fitting import FitResult, fit, loglik
from .gof import GofResult, format_p_value, gof_test, ks_distance
from .sampling import SeededRng, sample, sample_values

__version__ = "0.1.0"
