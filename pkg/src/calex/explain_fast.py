"""Fast factual explanations via perturbed-calibration calibrators.

Initialization pays the model cost once: for every feature it perturbs
that feature's column across a multiplied calibration set, scores the
result with the model, and keeps a calibrator per feature next to the
base calibrator built on the untouched calibration set.  Explaining an
instance then needs one model prediction and a calibrator lookup per
feature: each weight is the drop in calibrated output when that
feature's association with the target is destroyed, and the calibrator
intervals carry the uncertainty through to the weights.

Calibrator choice follows the task: Venn-Abers for classification (one
vs rest per class), a conformal predictive system for regression, and
for thresholded regression a composite that reads the predictive
distribution at the threshold and calibrates that probability with
Venn-Abers.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .cps import (FIXED_HALF, build_cps, query_interval, query_median,
                  query_threshold_prob)
from .errors import ConfigError
from .models import REGRESSION, model_outputs, perturbed_outputs
from .perturb import PerturbConfig, build_perturbed
from .venn_abers import VennAbersCalibrator

BELOW = "below"
ABOVE = "above"
THRESHOLDED = "thresholded"
LOO = "loo"
IN_SAMPLE = "in_sample"


@dataclass(frozen=True)
class ThresholdSpec:
    """Report the probability of the target falling below/above t."""
    t: float
    direction: str = ABOVE

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ConfigError("threshold must be finite")
        if self.direction not in (BELOW, ABOVE):
            raise ConfigError(f"direction must be {BELOW!r} or {ABOVE!r}, "
                              f"got {self.direction!r}")


@dataclass(frozen=True)
class FeatureContribution:
    name: str
    value: object
    weight: float
    low: float
    high: float
    condition: str = None


@dataclass(frozen=True)
class Explanation:
    instance_id: int
    task: str
    prediction: float
    low: float
    high: float
    features: tuple
    positive_class: str = None
    threshold: ThresholdSpec = None
    model_evals: int = 1


class ThresholdComposite:
    """Predictive-distribution value at t, recalibrated by Venn-Abers."""

    def __init__(self, cps, t, va):
        self.cps = cps
        self.t = t
        self.va = va

    def calibrate(self, prediction, query_key=0):
        score = query_threshold_prob(self.cps, prediction, self.t, query_key)
        return self.va.calibrate(score)


def _threshold_scores(c, predictions, targets, t, scores_mode):
    """Per calibration instance, the distribution value at t.

    In "loo" mode each instance's own residual is removed from the
    distribution before reading it, avoiding self-inclusion bias.
    """
    r = t - predictions
    less = np.searchsorted(c.residuals, r, side="left").astype(np.int64)
    leq = np.searchsorted(c.residuals, r, side="right").astype(np.int64)
    q = c.q
    if scores_mode == LOO:
        own = targets - predictions
        less = less - (own < r)
        leq = leq - (own <= r)
        q -= 1
    if c.tau_mode == FIXED_HALF:
        tau = 0.5
    else:
        tau = np.array([c._tau(i) for i in range(len(r))])
    tie = leq > less
    return np.where(tie, (less + (leq - less + 1) * tau) / (q + 1),
                    (less + tau) / (q + 1))


def _composite(predictions, targets, spec, tau_mode, seed, scores_mode):
    c = build_cps(predictions, targets, tau_mode, seed)
    scores = _threshold_scores(c, predictions, targets, spec.t, scores_mode)
    labels = (targets <= spec.t).astype(np.float64)
    return ThresholdComposite(c, spec.t, VennAbersCalibrator(scores, labels))


class FastExplainer:
    """Base calibrator plus one per-feature calibrator, query-ready.

    Built by init_fast; immutable apart from the lazily filled per-class
    calibrator cache for classification tasks.
    """

    def __init__(self, model, schema, task, config, threshold, percentiles):
        self.model = model
        self.schema = list(schema)
        self.task = task
        self.config = config
        self.threshold = threshold
        self.percentiles = tuple(percentiles)
        self.init_seconds = 0.0

    @property
    def n_features(self):
        return len(self.schema)

    # classification state: _cal_scores (q, C), _labels, _pert_scores
    # [(k*q, C) per feature], _tiled_labels, _base_cals per class,
    # _class_names, _per_class cache
    def _feature_cals(self, c):
        cals = self._per_class.get(c)
        if cals is None:
            cals = [VennAbersCalibrator(self._pert_scores[j][:, c],
                                        self._tiled_labels == c)
                    for j in range(self.n_features)]
            self._per_class[c] = cals
        return cals

    def _explain_one(self, instance_id, x, output):
        if self.task == REGRESSION:
            return self._explain_regression(instance_id, x, float(output))
        if self.task == THRESHOLDED:
            return self._explain_thresholded(instance_id, x, float(output))
        return self._explain_classification(instance_id, x, output)

    def _explain_classification(self, instance_id, x, scores):
        p_by_class = [self._base_cals[c].calibrate(scores[c])[2]
                      for c in range(len(self._base_cals))]
        pos = int(np.argmax(p_by_class))
        s = float(scores[pos])
        lo, hi, phi = self._base_cals[pos].calibrate(s)
        feats = []
        for j, cal in enumerate(self._feature_cals(pos)):
            flo, fhi, fphi = cal.calibrate(s)
            feats.append(self._contribution(j, x, phi, fphi, flo, fhi))
        return Explanation(instance_id, self.task, phi, lo, hi, tuple(feats),
                           positive_class=self._class_names[pos])

    def _explain_regression(self, instance_id, x, pred):
        lo_pct, hi_pct = self.percentiles
        phi = query_median(self._base_cps, pred)
        lo, hi = query_interval(self._base_cps, pred, lo_pct, hi_pct)
        feats = []
        for j, c in enumerate(self._feature_cps):
            fphi = query_median(c, pred)
            flo, fhi = query_interval(c, pred, lo_pct, hi_pct)
            feats.append(self._contribution(j, x, phi, fphi, flo, fhi))
        return Explanation(instance_id, self.task, float(phi), float(lo),
                           float(hi), tuple(feats))

    def _explain_thresholded(self, instance_id, x, pred):
        key = int(instance_id)
        phi, lo, hi = self._oriented(self._base_comp.calibrate(pred, key))
        feats = []
        for j, comp in enumerate(self._feature_comps):
            fphi, flo, fhi = self._oriented(comp.calibrate(pred, key))
            feats.append(self._contribution(j, x, phi, fphi, flo, fhi))
        return Explanation(instance_id, self.task, phi, lo, hi, tuple(feats),
                           threshold=self.threshold)

    def _oriented(self, triple):
        """(p_low, p_high, p) for y <= t, flipped if reporting above."""
        lo, hi, p = triple
        if self.threshold.direction == ABOVE:
            return 1.0 - p, 1.0 - hi, 1.0 - lo
        return p, lo, hi

    def _contribution(self, j, x, phi, fphi, flo, fhi):
        f = self.schema[j]
        value = f.categories[int(x[j])] if f.categories else float(x[j])
        return FeatureContribution(f.name, value, float(phi - fphi),
                                   float(phi - fhi), float(phi - flo))


def init_fast(model, calibration, config=None, threshold=None,
              percentiles=(5, 95), tau_mode=FIXED_HALF, scores_mode=LOO):
    """Build a FastExplainer from a model and a calibration Dataset.

    One batched model call per feature scores that feature's perturbed
    calibration set; no further model use happens at explain time beyond
    the single prediction per instance.
    """
    start = time.perf_counter()
    if config is None:
        config = PerturbConfig()
    if len(calibration) < 1:
        raise ConfigError("calibration set is empty")
    if scores_mode not in (LOO, IN_SAMPLE):
        raise ConfigError(f"unknown scores mode {scores_mode!r}")
    task = model.task
    if threshold is not None:
        if task != REGRESSION:
            raise ConfigError("a threshold applies to regression tasks only")
        task = THRESHOLDED
    e = FastExplainer(model, calibration.schema, task, config, threshold,
                      percentiles)

    pert = build_perturbed(calibration, config)
    cal_out = model_outputs(model, calibration)
    pert_out = [perturbed_outputs(model, f.name, pert.variant_matrix(j))
                for j, f in enumerate(calibration.schema)]
    k = config.scale_factor
    if task == REGRESSION:
        tiled_y = np.tile(calibration.y, k)
        e._base_cps = build_cps(cal_out, calibration.y, tau_mode, config.seed)
        e._feature_cps = [build_cps(out, tiled_y, tau_mode, config.seed)
                          for out in pert_out]
    elif task == THRESHOLDED:
        tiled_y = np.tile(calibration.y, k)
        e._base_comp = _composite(cal_out, calibration.y, threshold,
                                  tau_mode, config.seed, scores_mode)
        e._feature_comps = [_composite(out, tiled_y, threshold, tau_mode,
                                       config.seed, scores_mode)
                            for out in pert_out]
    else:
        labels = calibration.y
        names = model.class_names or calibration.target_categories
        e._class_names = tuple(names)
        e._cal_scores = cal_out
        e._labels = labels
        e._base_cals = [VennAbersCalibrator(cal_out[:, c], labels == c)
                        for c in range(cal_out.shape[1])]
        e._pert_scores = pert_out
        e._tiled_labels = np.tile(labels, k)
        e._per_class = {}
    e.init_seconds = time.perf_counter() - start
    return e


def explain_batch(e, X, instance_ids=None, outputs=None):
    """Explain each row of X; one batched model call for all of them."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != e.n_features:
        raise ConfigError(f"expected a matrix with {e.n_features} feature "
                          f"columns")
    if outputs is None:
        outputs = e.model.predict(X)
    if instance_ids is None:
        instance_ids = range(len(X))
    return [e._explain_one(int(i), X[r], outputs[r])
            for r, i in enumerate(instance_ids)]


def explain_fast(e, x, instance_id=0):
    """Explain a single instance (1-d feature vector)."""
    return explain_batch(e, np.asarray(x, dtype=np.float64)[None, :],
                         [instance_id])[0]


def explain_dataset(e, d):
    """Explain every row of a Dataset, ids taken from its row_ids."""
    return explain_batch(e, d.X, [int(i) for i in d.row_ids],
                         model_outputs(e.model, d))
