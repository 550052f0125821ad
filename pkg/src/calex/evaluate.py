"""Evaluation harness: stability, robustness, timing, and the ablation grid.

Stability re-initializes the explainer under seeds 1..R with the model
held fixed; robustness resamples the split and refits the model per run
with the explanation seed pinned; timing wall-clocks initialization and
each explanation call, nothing else.  The statistic shared by stability
and robustness follows the top-ranked feature: per instance, the feature
most often ranked first by absolute weight across runs, and the
population variance of that feature's weight across runs, averaged over
instances.
"""

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .dataset import split_dataset
from .errors import CalexError, ConfigError
from .explain_baseline import explain_factual, init_baseline
from .explain_fast import explain_fast, init_fast
from .models import REGRESSION, model_outputs
from .perturb import GAUSSIAN, UNIFORM, PerturbConfig

FAST = "fast"
BASELINE = "baseline"

SCALE_FACTORS = (1, 3, 5, 10)
SEVERITIES = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class TimingRecord:
    init_seconds: float
    mean_seconds: float
    median_seconds: float
    mean_model_evals: float


@dataclass(frozen=True)
class EvalRecord:
    dataset: str
    explainer: str
    config: dict
    init_seconds: float
    mean_explain_seconds: float
    median_explain_seconds: float
    mean_model_evals: float
    stability: float = None
    robustness: float = None
    model_prediction_variance: float = None


@dataclass(frozen=True)
class EvalReport:
    records: tuple

    def __post_init__(self):
        for r in self.records:
            if r.init_seconds < 0 or r.mean_explain_seconds < 0:
                raise CalexError("negative time in report")
            for v in (r.stability, r.robustness, r.model_prediction_variance):
                if v is not None and v < 0:
                    raise CalexError("negative variance in report")


def _build(explainer, model, calibration, config, threshold, percentiles):
    if explainer == FAST:
        return init_fast(model, calibration, config, threshold, percentiles)
    if explainer == BASELINE:
        return init_baseline(model, calibration, threshold, percentiles)
    raise ConfigError(f"unknown explainer {explainer!r}")


def _explain_one(explainer, e, x, instance_id):
    if explainer == FAST:
        return explain_fast(e, x, instance_id)
    return explain_factual(e, x, instance_id)


def _weights(explanations):
    return np.array([[f.weight for f in ex.features] for ex in explanations])


def top_feature_variance(weight_stack):
    """Mean over instances of the top feature's weight variance over runs.

    weight_stack has shape (runs, instances, features).  The top feature
    per instance is the mode over runs of the rank-1 feature by absolute
    weight; rank and mode ties go to the lowest feature index.
    """
    runs, n, n_feat = weight_stack.shape
    ranks = np.argmax(np.abs(weight_stack), axis=2)
    out = np.empty(n)
    for i in range(n):
        top = int(np.bincount(ranks[:, i], minlength=n_feat).argmax())
        out[i] = weight_stack[:, i, top].var()
    return float(out.mean())


def measure_stability(model, calibration, test, explainer=FAST, runs=5,
                      config=None, threshold=None, percentiles=(5, 95)):
    """Variance of the top feature's weight under seeds 1..runs."""
    if runs < 2:
        raise ConfigError("stability needs at least 2 runs")
    if config is None:
        config = PerturbConfig()
    stack = []
    for r in range(1, runs + 1):
        e = _build(explainer, model, calibration,
                   replace(config, seed=r), threshold, percentiles)
        stack.append(_weights([_explain_one(explainer, e, test.X[i],
                                            int(test.row_ids[i]))
                               for i in range(len(test))]))
    return top_feature_variance(np.stack(stack))


def measure_robustness(pool, eval_set, fit, explainer=FAST, runs=5,
                       explain_seed=42, config=None, threshold=None,
                       percentiles=(5, 95), train_frac=0.5, cal_frac=0.25):
    """Top-feature weight variance under resampled splits and refits.

    Each run re-splits `pool` with the run index as seed, refits the
    model via `fit(proper_training)`, builds the explainer with the
    explanation seed pinned, and explains the fixed `eval_set`.  Returns
    (variance, model-prediction variance), the latter being the variance
    of the model's own outputs across runs, the floor any explainer
    inherits from the refits.
    """
    if runs < 2:
        raise ConfigError("robustness needs at least 2 runs")
    if config is None:
        config = PerturbConfig()
    stack = []
    outputs = []
    for r in range(1, runs + 1):
        split = split_dataset(pool, train_frac, cal_frac, seed=r)
        model = fit(split.proper_training)
        e = _build(explainer, model, split.calibration,
                   replace(config, seed=explain_seed), threshold, percentiles)
        stack.append(_weights([_explain_one(explainer, e, eval_set.X[i],
                                            int(eval_set.row_ids[i]))
                               for i in range(len(eval_set))]))
        outputs.append(model_outputs(model, eval_set))
    variance = top_feature_variance(np.stack(stack))
    pred_var = float(np.stack(outputs).var(axis=0).mean())
    return variance, pred_var


def measure_time(model, calibration, test, explainer=FAST, config=None,
                 threshold=None, percentiles=(5, 95)):
    """Wall-clock init and per-instance explanation times, warm-up excluded."""
    if config is None:
        config = PerturbConfig()
    e = _build(explainer, model, calibration, config, threshold, percentiles)
    _explain_one(explainer, e, test.X[0], int(test.row_ids[0]))
    times = np.empty(len(test))
    evals = np.empty(len(test))
    for i in range(len(test)):
        start = time.perf_counter()
        ex = _explain_one(explainer, e, test.X[i], int(test.row_ids[i]))
        times[i] = time.perf_counter() - start
        evals[i] = ex.model_evals
    return TimingRecord(e.init_seconds, float(times.mean()),
                        float(np.median(times)), float(evals.mean()))


def ablation_grid(seed=0):
    """Noise-type x scale-factor x severity sweep configurations."""
    return [PerturbConfig(noise_type=nt, scale_factor=k, severity=s, seed=seed)
            for nt in (UNIFORM, GAUSSIAN)
            for k in SCALE_FACTORS
            for s in SEVERITIES]


def _check_bounds(ex):
    probabilistic = ex.task not in (REGRESSION,)
    values = [ex.prediction] + [f.weight for f in ex.features]
    if not all(np.isfinite(v) for v in values):
        raise CalexError(f"non-finite output for instance {ex.instance_id}")
    if probabilistic:
        if not 0 <= ex.prediction <= 1:
            raise CalexError(f"prediction {ex.prediction} outside [0, 1]")
        for f in ex.features:
            if not -1 <= f.weight <= 1:
                raise CalexError(f"weight {f.weight} outside [-1, 1]")
    for f in ex.features:
        if not f.low <= f.weight <= f.high:
            raise CalexError("weight outside its own interval")


def run_ablation(model, calibration, test, dataset_name, threshold=None,
                 percentiles=(5, 95), seed=0):
    """Run the fast explainer across the full grid, checking output bounds."""
    records = []
    for config in ablation_grid(seed):
        e = init_fast(model, calibration, config, threshold, percentiles)
        explain_fast(e, test.X[0], int(test.row_ids[0]))
        times = np.empty(len(test))
        for i in range(len(test)):
            start = time.perf_counter()
            ex = explain_fast(e, test.X[i], int(test.row_ids[i]))
            times[i] = time.perf_counter() - start
            _check_bounds(ex)
        records.append(EvalRecord(dataset_name, FAST, _config_dict(config),
                                  e.init_seconds, float(times.mean()),
                                  float(np.median(times)), 1.0))
    return EvalReport(tuple(records))


def _config_dict(config):
    return {"noise_type": config.noise_type,
            "scale_factor": config.scale_factor,
            "severity": config.severity,
            "seed": config.seed,
            "numeric_mode": config.numeric_mode}


def report_to_json(report):
    return json.dumps({"records": [asdict(r) for r in report.records]},
                      indent=2, allow_nan=False)


def report_from_json(text):
    data = json.loads(text)
    return EvalReport(tuple(EvalRecord(**r) for r in data["records"]))


CSV_FIELDS = ("dataset", "explainer", "noise_type", "scale_factor",
              "severity", "seed", "numeric_mode", "init_seconds",
              "mean_explain_seconds", "median_explain_seconds",
              "mean_model_evals", "stability", "robustness",
              "model_prediction_variance")


def report_to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_FIELDS)
    for r in report.records:
        row = [r.dataset, r.explainer]
        row += [r.config.get(k, "") for k in ("noise_type", "scale_factor",
                                              "severity", "seed",
                                              "numeric_mode")]
        for k in ("init_seconds", "mean_explain_seconds",
                  "median_explain_seconds", "mean_model_evals", "stability",
                  "robustness", "model_prediction_variance"):
            v = getattr(r, k)
            row.append("" if v is None else repr(v))
        w.writerow(row)
    return buf.getvalue()
