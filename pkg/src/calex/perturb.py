"""Calibration-set multiplication and per-feature perturbation.

The perturbed calibration set behind the fast explainer is built once per
feature: stack k verbatim copies of the calibration set, then disturb
that feature's column only.  Categorical columns are rearranged by one
Fisher-Yates shuffle over all k*q entries; numeric columns are shuffled
the same way and then offset by noise whose scale comes from the original
(unmultiplied) column: Normal(0, s*sigma) or Uniform(-s*R, s*R).  Setting
numeric_mode="noise_only" skips the shuffle for numeric columns.

Every random draw comes from a stream keyed by (seed, purpose, feature
index), so columns are independent and bit-reproducible.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .dataset import CATEGORICAL, Dataset
from .errors import ConfigError

UNIFORM = "uniform"
GAUSSIAN = "gaussian"
PERMUTE_NOISE = "permute_noise"
NOISE_ONLY = "noise_only"


@dataclass(frozen=True)
class PerturbConfig:
    noise_type: str = UNIFORM
    scale_factor: int = 5
    severity: float = 0.5
    seed: int = 0
    numeric_mode: str = PERMUTE_NOISE

    def __post_init__(self):
        if self.noise_type not in (UNIFORM, GAUSSIAN):
            raise ConfigError(f"unknown noise type {self.noise_type!r}")
        if not isinstance(self.scale_factor, int) or self.scale_factor < 1:
            raise ConfigError(f"scale factor must be a positive integer, got "
                              f"{self.scale_factor!r}")
        if self.severity < 0:
            raise ConfigError(f"severity must be >= 0, got {self.severity}")
        if self.numeric_mode not in (PERMUTE_NOISE, NOISE_ONLY):
            raise ConfigError(f"unknown numeric mode {self.numeric_mode!r}")


def multiply(calibration, k):
    """Stack k verbatim copies (copy-major row order), targets included."""
    reps = (k, 1) if calibration.X.ndim == 2 else k
    return Dataset(calibration.schema, np.tile(calibration.X, reps),
                   np.tile(calibration.y, k), calibration.target_name,
                   calibration.target_kind, calibration.target_categories,
                   np.tile(calibration.row_ids, k))


def permute_feature(values, seed, feature_index=0):
    """One Fisher-Yates shuffle of the column, on stream (seed, feature)."""
    perm = rng.permutation(len(values), rng.stream_rng(seed, rng.PERMUTE,
                                                       feature_index))
    return np.asarray(values)[perm]


def gaussian_noise(values, s, sigma, seed, feature_index=0):
    """Add Normal(0, s*sigma) draws; unchanged when s or sigma is 0."""
    values = np.asarray(values, dtype=np.float64)
    if s == 0 or sigma == 0:
        return values.copy()
    eta = rng.normals(len(values), rng.stream_rng(seed, rng.NOISE, feature_index))
    return values + s * sigma * eta


def uniform_noise(values, s, range_r, seed, feature_index=0):
    """Add Uniform(-s*R, s*R) draws; unchanged when s or R is 0."""
    values = np.asarray(values, dtype=np.float64)
    if s == 0 or range_r == 0:
        return values.copy()
    u = rng.stream_rng(seed, rng.NOISE, feature_index).random(len(values))
    return values + s * range_r * (2.0 * u - 1.0)


class PerturbedCalibration:
    """Multiplied calibration set plus one variant column per feature.

    `multiplied` has k*q rows; `columns[j]` is feature j's perturbed
    column; `sigma[j]` and `range_[j]` are that feature's perturbation
    scales measured on the original calibration column (0 for
    categoricals).
    """

    def __init__(self, multiplied, columns, sigma, range_):
        self.multiplied = multiplied
        self.columns = columns
        self.sigma = sigma
        self.range_ = range_

    def variant_matrix(self, feature_index):
        """The multiplied object matrix with feature j's column perturbed."""
        X = self.multiplied.X.copy()
        X[:, feature_index] = self.columns[feature_index]
        return X


def build_perturbed(calibration, config):
    """Run the per-feature perturbation over the multiplied calibration set."""
    mult = multiply(calibration, config.scale_factor)
    n_feat = calibration.n_features
    sigma = np.zeros(n_feat)
    range_ = np.zeros(n_feat)
    columns = []
    for j, f in enumerate(calibration.schema):
        col = mult.X[:, j]
        if f.kind == CATEGORICAL:
            columns.append(permute_feature(col, config.seed, j))
            continue
        orig = calibration.X[:, j]
        sigma[j] = orig.std()
        range_[j] = orig.max() - orig.min()
        if config.numeric_mode == PERMUTE_NOISE:
            col = permute_feature(col, config.seed, j)
        if config.noise_type == GAUSSIAN:
            col = gaussian_noise(col, config.severity, sigma[j], config.seed, j)
        else:
            col = uniform_noise(col, config.severity, range_[j], config.seed, j)
        columns.append(col)
    return PerturbedCalibration(mult, columns, sigma, range_)
