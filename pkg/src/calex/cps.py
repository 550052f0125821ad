"""Conformal predictive systems over signed residuals.

The calibration scores are the signed errors alpha_i = y_i - h(x_i).  For
a new prediction the values C_(i) = prediction + alpha_i, flanked by the
sentinels C_(0) = -inf and C_(q+1) = +inf, form a predictive distribution
that answers four kinds of query: distribution value at a point, central
interval, median, and threshold probability.
"""

import math

import numpy as np

from . import rng

FIXED_HALF = "fixed_half"
SEEDED_UNIFORM = "seeded_uniform"


class Cps:
    """Sorted signed residuals plus the tie-breaking tau policy."""

    def __init__(self, residuals, tau_mode=FIXED_HALF, seed=0):
        residuals = np.sort(np.asarray(residuals, dtype=np.float64))
        if len(residuals) < 1:
            raise ValueError("need at least one residual")
        if not np.isfinite(residuals).all():
            raise ValueError("residuals must be finite")
        if tau_mode not in (FIXED_HALF, SEEDED_UNIFORM):
            raise ValueError(f"unknown tau mode {tau_mode!r}")
        self.residuals = residuals
        self.residuals.flags.writeable = False
        self.q = len(residuals)
        self.tau_mode = tau_mode
        self.seed = seed

    def _tau(self, query_key):
        if self.tau_mode == FIXED_HALF:
            return 0.5
        return float(rng.stream_rng(self.seed, rng.TAU, query_key).random())


def build_cps(cal_predictions, cal_targets, tau_mode=FIXED_HALF, seed=0):
    p = np.asarray(cal_predictions, dtype=np.float64)
    y = np.asarray(cal_targets, dtype=np.float64)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError("predictions and targets must be matching 1-d sequences")
    if not (np.isfinite(p).all() and np.isfinite(y).all()):
        raise ValueError("predictions and targets must be finite")
    return Cps(y - p, tau_mode, seed)


def cpd_from_counts(count_less, count_leq, q, tau):
    """Distribution value given how many C values fall below / at y."""
    if count_less == count_leq:
        return (count_less + tau) / (q + 1)
    # y ties one or more C values: lowest tied index count_less + 1,
    # highest tied index count_leq
    i_lo = count_less + 1
    i_hi = count_leq
    return (i_lo - 1 + (i_hi - i_lo + 2) * tau) / (q + 1)


def cpd_value(c, prediction, y, query_key=0):
    """P(Y <= y) under the predictive distribution at `prediction`."""
    r = y - prediction
    less = int(np.searchsorted(c.residuals, r, side="left"))
    leq = int(np.searchsorted(c.residuals, r, side="right"))
    return cpd_from_counts(less, leq, c.q, c._tau(query_key))


def _percentile_value(c, prediction, index):
    if index < 1:
        return -math.inf
    if index > c.q:
        return math.inf
    return float(prediction + c.residuals[index - 1])


def query_interval(c, prediction, low_percentile, high_percentile):
    """Central interval [C_(floor(lo(q+1)/100)), C_(ceil(hi(q+1)/100))]."""
    if not 0 <= low_percentile < high_percentile <= 100:
        raise ValueError(f"need 0 <= low < high <= 100, got "
                         f"({low_percentile}, {high_percentile})")
    lo_idx = math.floor(low_percentile * (c.q + 1) / 100.0)
    hi_idx = math.ceil(high_percentile * (c.q + 1) / 100.0)
    return (_percentile_value(c, prediction, lo_idx),
            _percentile_value(c, prediction, hi_idx))


def query_median(c, prediction):
    half = 0.5 * (c.q + 1)
    return 0.5 * (_percentile_value(c, prediction, math.floor(half)) +
                  _percentile_value(c, prediction, math.ceil(half)))


def query_threshold_prob(c, prediction, t, query_key=0):
    """Probability that the target is at most t."""
    if not math.isfinite(t):
        raise ValueError("threshold must be finite")
    return cpd_value(c, prediction, t, query_key)
