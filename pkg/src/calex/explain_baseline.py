"""Baseline factual explanations: perturb each test instance directly.

For every feature the explained instance is re-scored with that feature
set to each plausible alternative value (observed categories, or decile
bin means of the calibration column), so the model runs at explanation
time; this is the cost that the fast explainer's initialization
amortizes away.  Each feature also carries a factual rule condition that
the instance's own value satisfies.
"""

import time

import numpy as np

from .cps import FIXED_HALF, build_cps, query_interval, query_median
from .dataset import CATEGORICAL
from .errors import ConfigError
from .explain_fast import (ABOVE, LOO, THRESHOLDED, Explanation,
                           FeatureContribution, _composite)
from .models import REGRESSION, model_outputs
from .venn_abers import VennAbersCalibrator


class _CategoricalPlan:
    """Observed categories with calibration frequencies."""

    def __init__(self, codes, freqs):
        self.codes = codes
        self.freqs = freqs


class _NumericPlan:
    """Strictly increasing decile edges and per-bin calibration means."""

    def __init__(self, edges, bin_means):
        self.edges = edges
        self.bin_means = bin_means  # bin index -> mean of that bin


class BaselineExplainer:
    """Base calibrator plus per-feature perturbation plans."""

    def __init__(self, model, schema, task, threshold, percentiles):
        self.model = model
        self.schema = list(schema)
        self.task = task
        self.threshold = threshold
        self.percentiles = tuple(percentiles)
        self.init_seconds = 0.0

    def _positive_class(self, output_row):
        p_by_class = [self._base_cals[c].calibrate(float(output_row[c]))[2]
                      for c in range(len(self._base_cals))]
        return int(np.argmax(p_by_class))

    def _triples(self, outputs, pos):
        """(value, low, high) per model output, through the base calibrator."""
        if self.task == REGRESSION:
            lo_pct, hi_pct = self.percentiles
            return [(query_median(self._base_cps, p),
                     *query_interval(self._base_cps, p, lo_pct, hi_pct))
                    for p in outputs]
        if self.task == THRESHOLDED:
            out = []
            for p in outputs:
                lo, hi, prob = self._base_comp.calibrate(float(p))
                if self.threshold.direction == ABOVE:
                    out.append((1.0 - prob, 1.0 - hi, 1.0 - lo))
                else:
                    out.append((prob, lo, hi))
            return out
        cal = self._base_cals[pos]
        out = []
        for row in outputs:
            lo, hi, p = cal.calibrate(float(row[pos]))
            out.append((p, lo, hi))
        return out


def init_baseline(model, calibration, threshold=None, percentiles=(5, 95),
                  tau_mode=FIXED_HALF, scores_mode=LOO, bins=10):
    """Build a BaselineExplainer from a model and a calibration Dataset."""
    start = time.perf_counter()
    if len(calibration) < 1:
        raise ConfigError("calibration set is empty")
    task = model.task
    if threshold is not None:
        if task != REGRESSION:
            raise ConfigError("a threshold applies to regression tasks only")
        task = THRESHOLDED
    e = BaselineExplainer(model, calibration.schema, task, threshold,
                          percentiles)
    cal_out = model_outputs(model, calibration)
    if task == REGRESSION:
        e._base_cps = build_cps(cal_out, calibration.y, tau_mode, 0)
    elif task == THRESHOLDED:
        e._base_comp = _composite(cal_out, calibration.y, threshold,
                                  tau_mode, 0, scores_mode)
    else:
        labels = calibration.y
        e._class_names = tuple(model.class_names or
                               calibration.target_categories)
        e._base_cals = [VennAbersCalibrator(cal_out[:, c], labels == c)
                        for c in range(cal_out.shape[1])]
    plans = []
    for j, f in enumerate(calibration.schema):
        col = calibration.X[:, j]
        if f.kind == CATEGORICAL:
            codes, counts = np.unique(col, return_counts=True)
            plans.append(_CategoricalPlan(codes, counts / counts.sum()))
        else:
            edges = np.unique(np.quantile(col, [i / bins for i in range(1, bins)]))
            which = np.searchsorted(edges, col, side="left")
            bin_means = {}
            for b in range(len(edges) + 1):
                mask = which == b
                if mask.any():
                    bin_means[b] = float(col[mask].mean())
            plans.append(_NumericPlan(edges, bin_means))
    e._plans = plans
    e.init_seconds = time.perf_counter() - start
    return e


def _variants(plan, x_j):
    """Alternative values to try, their averaging weights, the condition."""
    if isinstance(plan, _CategoricalPlan):
        return plan.codes, plan.freqs, None
    edges = plan.edges
    if len(edges) == 0:
        return np.empty(0), None, None
    own = int(np.searchsorted(edges, x_j, side="left"))
    values = np.array([m for b, m in sorted(plan.bin_means.items())
                       if b != own])
    if own == len(edges):
        cond = f"> {float(edges[-1])!r}"
    else:
        cond = f"<= {float(edges[own])!r}"
    return values, None, cond


def explain_factual(e, x, instance_id=0):
    """Explanation with factual rules for one instance (1-d vector)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != len(e.schema):
        raise ConfigError(f"expected {len(e.schema)} feature values")
    out = e.model.predict(x[None, :])
    pos = None if e.task in (REGRESSION, THRESHOLDED) else \
        e._positive_class(out[0])
    phi, lo, hi = e._triples(out, pos)[0]
    feats = []
    evals = 0
    for j, f in enumerate(e.schema):
        values, freqs, cond = _variants(e._plans[j], float(x[j]))
        x_display = f.categories[int(x[j])] if f.categories else float(x[j])
        if cond is None:
            cond = f"= {x_display}" if f.categories else f"= {x_display!r}"
        cond = f"{f.name} {cond}"
        if len(values) == 0:
            feats.append(FeatureContribution(f.name, x_display, 0.0,
                                             phi - hi, phi - lo, cond))
            continue
        V = np.repeat(x[None, :], len(values), axis=0)
        V[:, j] = values
        outs = e.model.predict(V)
        evals += len(values)
        tr = np.asarray(e._triples(outs, pos))
        if freqs is None:
            fphi, flo, fhi = tr.mean(axis=0)
        else:
            fphi, flo, fhi = freqs @ tr
        feats.append(FeatureContribution(f.name, x_display, float(phi - fphi),
                                         float(phi - fhi), float(phi - flo),
                                         cond))
    return Explanation(int(instance_id), e.task, phi, lo, hi, tuple(feats),
                       positive_class=(None if pos is None
                                       else e._class_names[pos]),
                       threshold=e.threshold, model_evals=evals)


def explain_factual_dataset(e, d):
    """Explain every row of a Dataset, ids taken from its row_ids."""
    return [explain_factual(e, d.X[i], int(d.row_ids[i]))
            for i in range(len(d))]
