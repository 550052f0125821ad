"""Weighted isotonic regression via pool-adjacent-violators.

This is the computational core behind the probability calibrator: fits are
refit per query, so the kernel is a tight O(n) block-stack scan compiled
with numba.
"""

import numpy as np
from numba import njit


class IsotonicFit:
    """Non-decreasing step function fitted to weighted points.

    Attributes
    ----------
    x : ndarray
        Distinct predictor values, sorted ascending (equal-x input points
        are merged into one weighted point before fitting).
    y : ndarray
        Fitted values, one per distinct x, non-decreasing.
    """

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y

    def evaluate(self, x):
        """Right-continuous step lookup, scalar or element-wise.

        An exact-match x returns its fitted value; otherwise the value of
        the largest breakpoint <= x; below all breakpoints, the first
        fitted value.
        """
        i = np.searchsorted(self.x, x, side="right") - 1
        return self.y[np.maximum(i, 0)]


@njit(cache=True)
def pava(y, w):
    """Weighted least-squares isotonic fit of y (weights w), in input order.

    Linear block-stack scan; returns the unique non-decreasing minimizer
    of sum(w * (fit - y)**2), with pooled blocks sharing their weighted
    mean.
    """
    n = y.shape[0]
    out = np.empty(n)
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        level[m] = y[i]
        weight[m] = w[i]
        start[m] = i
        m += 1
        while m > 1 and level[m - 2] > level[m - 1]:
            tot = weight[m - 2] + weight[m - 1]
            level[m - 2] = (level[m - 2] * weight[m - 2] + level[m - 1] * weight[m - 1]) / tot
            weight[m - 2] = tot
            m -= 1
    for b in range(m):
        end = start[b + 1] if b + 1 < m else n
        for i in range(start[b], end):
            out[i] = level[b]
    return out


def merge_equal_x(x, y, w):
    """Merge equal-x points: weights summed, y weight-averaged.

    Expects x sorted ascending; returns (x, y, w) with strictly
    increasing x.
    """
    keep = np.empty(len(x), dtype=bool)
    keep[0] = True
    np.not_equal(x[1:], x[:-1], out=keep[1:])
    if keep.all():
        return x, y, w
    idx = np.flatnonzero(keep)
    wsum = np.add.reduceat(w, idx)
    ysum = np.add.reduceat(w * y, idx)
    return x[idx], ysum / wsum, wsum


def fit_pava(x, y, sample_weight=None):
    """Fit a weighted isotonic regression of y on x.

    Points are sorted by x and equal-x points merged (weight-summed,
    y weight-averaged) before the PAVA scan, so the optimum is unique and
    evaluation single-valued.

    Parameters
    ----------
    x, y : array-like of shape (n,)
    sample_weight : array-like of shape (n,), optional
        Positive weights; defaults to 1.

    Returns
    -------
    IsotonicFit
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0:
        raise ValueError("isotonic fit needs at least one point")
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching 1-d sequences")
    if sample_weight is None:
        w = np.ones_like(y)
    else:
        w = np.asarray(sample_weight, dtype=np.float64)
        if w.shape != x.shape:
            raise ValueError("sample weights must match x")
        if np.any(w <= 0):
            raise ValueError("sample weights must be positive")
    order = np.argsort(x, kind="stable")
    x, y, w = merge_equal_x(x[order], y[order], w[order])
    return IsotonicFit(x, pava(y, w))
