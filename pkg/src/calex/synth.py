"""Synthetic tabular generators for tests, benchmarks, and demos.

All tasks draw features uniformly from [-1, 1] and tie the target to the
first `n_informative` features only, so informativeness is known by
construction.  Draws flow through the package RNG streams, making every
dataset a pure function of its arguments.
"""

import numpy as np

from . import rng
from .dataset import CATEGORICAL, NUMERIC, Dataset, FeatureSchema

CLASS_TOKENS = ("c0", "c1", "c2", "c3", "c4")
LEVELS = ("lo", "mid", "hi")


def _features(n, n_features, g):
    return 2.0 * g.random((n, n_features)) - 1.0


def _schema(n_features):
    return [FeatureSchema(f"f{j}", NUMERIC) for j in range(n_features)]


def make_regression(n, n_features=5, n_informative=3, noise_sd=0.3, seed=0):
    """Linear target over the informative features plus gaussian noise."""
    g = rng.stream_rng(seed, rng.DATA, 0)
    X = _features(n, n_features, g)
    w = np.zeros(n_features)
    base = [2.0, -1.5, 1.0, 0.75, -0.5]
    m = min(n_informative, n_features)
    w[:m] = (base * (m // len(base) + 1))[:m]
    y = X @ w
    if noise_sd > 0:
        y = y + noise_sd * rng.normals(n, g)
    return Dataset(_schema(n_features), X, y, "target")


def make_classification(n, n_features=10, n_informative=1, n_classes=2,
                        signal=6.0, seed=0):
    """Labels drawn from class probabilities driven by informative features.

    Binary: P(class 1) = sigmoid(signal * mean of informative features).
    Multiclass: softmax over per-class scores, class c keyed to informative
    feature c mod n_informative.
    """
    g = rng.stream_rng(seed, rng.DATA, 1)
    X = _features(n, n_features, g)
    m = min(n_informative, n_features)
    if n_classes == 2:
        logit = signal * X[:, :m].mean(axis=1)
        p1 = 1.0 / (1.0 + np.exp(-logit))
        y = (g.random(n) < p1).astype(np.int64)
    else:
        scores = np.stack([signal * X[:, c % m] for c in range(n_classes)], axis=1)
        scores -= scores.max(axis=1, keepdims=True)
        p = np.exp(scores)
        p /= p.sum(axis=1, keepdims=True)
        u = g.random(n)
        y = (p.cumsum(axis=1) < u[:, None]).sum(axis=1).astype(np.int64)
        np.minimum(y, n_classes - 1, out=y)
    return Dataset(_schema(n_features), X, y, "label", CATEGORICAL,
                   CLASS_TOKENS[:n_classes])


def with_categorical(d, features, seed=0):
    """Replace the named numeric features with 3-level categoricals.

    Values are binned at the column's tertiles; codes follow the LEVELS
    token order, so the mapping is monotone in the original value.
    """
    schema = list(d.schema)
    X = d.X.copy()
    for name in features:
        j = d.feature_names().index(name)
        col = X[:, j]
        edges = np.quantile(col, [1 / 3, 2 / 3])
        X[:, j] = np.searchsorted(edges, col)
        schema[j] = FeatureSchema(name, CATEGORICAL, LEVELS)
    return Dataset(schema, X, d.y, d.target_name, d.target_kind,
                   d.target_categories, d.row_ids)
