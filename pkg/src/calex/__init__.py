"""Calibrated predictions with fast uncertainty-aware feature importance.

The package calibrates a model's outputs (Venn-Abers intervals for
classification, conformal predictive systems for regression) and explains
individual predictions by measuring how the calibrated output moves when
each feature's association with the target is destroyed.  The fast
explainer perturbs the calibration set once at initialization; the
baseline explainer perturbs every test instance at explanation time.
"""

from .dataset import (CATEGORICAL, NUMERIC, Dataset, FeatureSchema, Split,
                      load_csv, save_csv, split_dataset)
from .errors import CalexError, ConfigError, DataError
from .models import (ExternalScores, KnnModel, fit_knn, load_external_scores,
                     model_outputs)
from .isotonic import IsotonicFit, fit_pava, pava
from .venn_abers import VennAbersCalibrator, va_calibrate, va_calibrate_batch
from .cps import (Cps, build_cps, cpd_value, query_interval, query_median,
                  query_threshold_prob)
from .perturb import (PerturbConfig, PerturbedCalibration, build_perturbed,
                      gaussian_noise, multiply, permute_feature, uniform_noise)
from .explain_fast import (Explanation, FastExplainer, FeatureContribution,
                           ThresholdSpec, explain_batch, explain_dataset,
                           explain_fast, init_fast)
from .explain_baseline import (BaselineExplainer, explain_factual,
                               explain_factual_dataset, init_baseline)
from .evaluate import (EvalRecord, EvalReport, TimingRecord, ablation_grid,
                       measure_robustness, measure_stability, measure_time,
                       report_from_json, report_to_csv, report_to_json,
                       run_ablation)
from . import synth

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL", "NUMERIC", "Dataset", "FeatureSchema", "Split",
    "load_csv", "save_csv", "split_dataset",
    "CalexError", "ConfigError", "DataError",
    "ExternalScores", "KnnModel", "fit_knn", "load_external_scores",
    "model_outputs",
    "IsotonicFit", "fit_pava", "pava",
    "VennAbersCalibrator", "va_calibrate", "va_calibrate_batch",
    "Cps", "build_cps", "cpd_value", "query_interval", "query_median",
    "query_threshold_prob",
    "PerturbConfig", "PerturbedCalibration", "build_perturbed",
    "gaussian_noise", "multiply", "permute_feature", "uniform_noise",
    "Explanation", "FastExplainer", "FeatureContribution", "ThresholdSpec",
    "explain_batch", "explain_dataset", "explain_fast", "init_fast",
    "BaselineExplainer", "explain_factual", "explain_factual_dataset",
    "init_baseline",
    "EvalRecord", "EvalReport", "TimingRecord", "ablation_grid",
    "measure_robustness", "measure_stability", "measure_time",
    "report_from_json", "report_to_csv", "report_to_json", "run_ablation",
    "synth",
]
