"""Inductive Venn-Abers calibration for binary scores.

Each query refits two isotonic regressions over the calibration pairs
plus the test score labelled 0 and labelled 1; the fitted values at the
test score bound the class-1 probability, and the regularized estimate

    p = p_high / (1 - p_low + p_high)

minimizes log loss inside the interval.  Repeated queries at the same
score are served from a per-calibrator cache, which matters when scores
take few distinct values.
"""

import numpy as np

from .isotonic import merge_equal_x, pava, IsotonicFit


class VennAbersCalibrator:
    """Calibration pairs (score, binary label), kept sorted by score."""

    def __init__(self, scores, labels):
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if scores.ndim != 1 or scores.shape != labels.shape:
            raise ValueError("scores and labels must be matching 1-d sequences")
        if len(scores) < 1:
            raise ValueError("need at least one calibration pair")
        if ((scores < 0) | (scores > 1) | ~np.isfinite(scores)).any():
            raise ValueError("scores must lie in [0, 1]")
        if not np.isin(labels, (0.0, 1.0)).all():
            raise ValueError("labels must be 0 or 1")
        order = np.argsort(scores, kind="stable")
        self._s = np.ascontiguousarray(scores[order])
        self._y = np.ascontiguousarray(labels[order])
        self._s.flags.writeable = False
        self._y.flags.writeable = False
        self._cache = {}

    @property
    def q(self):
        return len(self._s)

    def _augmented_fit(self, test_score, label):
        pos = np.searchsorted(self._s, test_score)
        x = np.insert(self._s, pos, test_score)
        y = np.insert(self._y, pos, label)
        xm, ym, wm = merge_equal_x(x, y, np.ones(len(x)))
        return IsotonicFit(xm, pava(ym, wm))

    def calibrate(self, test_score):
        """Return (p_low, p_high, p) for one test score in [0, 1]."""
        t = float(test_score)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        if not 0 <= t <= 1:
            raise ValueError(f"test score {t} outside [0, 1]")
        p_low = float(self._augmented_fit(t, 0.0).evaluate(t))
        p_high = float(self._augmented_fit(t, 1.0).evaluate(t))
        p = p_high / (1.0 - p_low + p_high)
        out = (p_low, p_high, p)
        self._cache[t] = out
        return out


def va_calibrate(c, test_score):
    return c.calibrate(test_score)


def va_calibrate_batch(c, test_scores):
    return [c.calibrate(t) for t in test_scores]
