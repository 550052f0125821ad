"""Score providers: a built-in k-NN model and precomputed external scores.

The explanation machinery only ever consumes model outputs, so any object
with a ``task`` attribute and a ``predict`` method works.  ``KnnModel``
keeps the package dependency-free; ``ExternalScores`` serves stored
outputs looked up by row identity for fully model-agnostic use.
"""

import csv
import os

import numpy as np
from numba import njit

from .dataset import CATEGORICAL, NUMERIC
from .errors import ConfigError, DataError

REGRESSION = "regression"
BINARY = "binary"
MULTICLASS = "multiclass"


@njit(cache=True)
def _select_counts(d, codes, k, n_classes):
    # k rounds of first-minimum selection: ties go to the lowest row index
    n, l = d.shape
    out = np.zeros((n, n_classes))
    used = np.empty(l, dtype=np.bool_)
    for i in range(n):
        used[:] = False
        for _ in range(k):
            best = -1
            bd = np.inf
            for j in range(l):
                if not used[j] and d[i, j] < bd:
                    bd = d[i, j]
                    best = j
            used[best] = True
            out[i, codes[best]] += 1.0
    return out


@njit(cache=True)
def _select_means(d, targets, k):
    n, l = d.shape
    out = np.zeros(n)
    used = np.empty(l, dtype=np.bool_)
    for i in range(n):
        used[:] = False
        acc = 0.0
        for _ in range(k):
            best = -1
            bd = np.inf
            for j in range(l):
                if not used[j] and d[i, j] < bd:
                    bd = d[i, j]
                    best = j
            used[best] = True
            acc += targets[best]
        out[i] = acc / k
    return out


class KnnModel:
    """k-nearest-neighbour scorer over a proper training set.

    Distance is squared Euclidean on standardized numeric features plus a
    0/1 mismatch per categorical feature.  Standardization statistics come
    from the proper training set only; zero-variance numerics get weight 0
    so they contribute nothing.  Classification scores are class fractions
    among the k nearest neighbours, regression predictions their mean
    target.  Neighbour ties break on the lowest training-row index.
    """

    def __init__(self, k, task, schema, train_X, train_y, class_names=()):
        self.k = k
        self.task = task
        self.schema = list(schema)
        self.class_names = tuple(class_names)
        self.n_classes = len(self.class_names)
        self._cat = np.array([f.kind == CATEGORICAL for f in self.schema])
        num = ~self._cat
        mean = np.zeros(len(self.schema))
        inv_std = np.zeros(len(self.schema))
        if num.any():
            mean[num] = train_X[:, num].mean(axis=0)
            std = train_X[:, num].std(axis=0)
            nz = std > 0
            inv = np.zeros(len(std))
            inv[nz] = 1.0 / std[nz]
            inv_std[num] = inv
        self._mean = mean
        self._inv_std = inv_std
        self._train = self._transform(train_X)
        self._train_sq = self._num_sq(self._train)
        if task == REGRESSION:
            self._y = np.ascontiguousarray(train_y, dtype=np.float64)
        else:
            self._y = np.ascontiguousarray(train_y, dtype=np.int64)
        for arr in (self._train, self._y):
            arr.flags.writeable = False

    def _transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.schema):
            raise DataError(f"expected {len(self.schema)} feature columns, got "
                            f"{X.shape[1] if X.ndim == 2 else X.ndim}")
        out = X.copy()
        num = ~self._cat
        out[:, num] = (X[:, num] - self._mean[num]) * self._inv_std[num]
        return out

    def _num_sq(self, T):
        num = ~self._cat
        return (T[:, num] ** 2).sum(axis=1)

    def sq_distances(self, Xa, Xb=None):
        """Pairwise squared distances between raw instance matrices."""
        A = self._transform(Xa)
        if Xb is None:
            B, b_sq = self._train, self._train_sq
        else:
            B = self._transform(Xb)
            b_sq = self._num_sq(B)
        num = ~self._cat
        An, Bn = A[:, num], B[:, num]
        d = self._num_sq(A)[:, None] + b_sq[None, :] - 2.0 * (An @ Bn.T)
        np.maximum(d, 0.0, out=d)
        for j in np.flatnonzero(self._cat):
            d += A[:, j][:, None] != B[:, j][None, :]
        return d

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if len(X) == 0:
            if self.task == REGRESSION:
                return np.empty(0)
            return np.empty((0, self.n_classes))
        d = self.sq_distances(X)
        if self.task == REGRESSION:
            return _select_means(d, self._y, self.k)
        return _select_counts(d, self._y, self.k, self.n_classes) / self.k


def fit_knn(train, k):
    """Fit a KnnModel on a proper training Dataset."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if k > len(train):
        raise ConfigError(f"k={k} exceeds the {len(train)} proper training instances")
    if train.target_kind == NUMERIC:
        return KnnModel(k, REGRESSION, train.schema, train.X, train.y)
    task = BINARY if train.n_classes == 2 else MULTICLASS
    return KnnModel(k, task, train.schema, train.X, train.y, train.target_categories)


class ExternalScores:
    """Precomputed model outputs, looked up by row identity.

    `base` maps row id to a score vector (classification) or prediction
    (regression).  `perturbed` optionally maps feature name to the score
    table for that feature's perturbed calibration set, in perturbed-row
    order; without it the fast explainer cannot initialize.
    """

    def __init__(self, task, row_ids, values, class_names=(), perturbed=None):
        self.task = task
        self.class_names = tuple(class_names)
        self.n_classes = len(self.class_names)
        values = np.asarray(values, dtype=np.float64)
        if task == REGRESSION:
            if values.ndim != 1:
                raise DataError("regression scores must be one column")
        else:
            if values.ndim != 2 or values.shape[1] != self.n_classes:
                raise DataError("classification scores need one column per class")
            sums = values.sum(axis=1)
            if ((values < -1e-9) | (values > 1 + 1e-9)).any() or \
                    (np.abs(sums - 1) > 1e-6).any():
                raise DataError("classification scores must lie in [0,1] and "
                                "sum to 1 per row")
        ids = [int(r) for r in row_ids]
        if len(ids) != len(values):
            raise DataError("score rows do not match row ids")
        if len(set(ids)) != len(ids):
            raise DataError("duplicate row ids in score table")
        self._index = {r: i for i, r in enumerate(ids)}
        self._values = values
        self.perturbed = dict(perturbed or {})

    def lookup(self, row_ids):
        try:
            pos = [self._index[int(r)] for r in row_ids]
        except KeyError as e:
            raise DataError(f"no stored score for row id {e.args[0]}") from None
        return self._values[pos]

    def predict(self, X):
        raise ConfigError("external scores cannot evaluate new objects; use a "
                          "built-in model or look rows up by id")


def _read_score_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty score file") from None
        rows = list(reader)
    if len(header) < 2:
        raise DataError(f"{path}: need a row-index column plus score columns")
    if not rows:
        raise DataError(f"{path}: no score rows")
    ids = []
    values = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(row)} cells, "
                            f"expected {len(header)}")
        try:
            ids.append(int(row[0]))
            values.append([float(c) for c in row[1:]])
        except ValueError:
            raise DataError(f"{path}: unparseable number at row {i + 2}") from None
    return header[1:], np.array(ids), np.array(values)


def load_external_scores(path, dataset):
    """Build ExternalScores for `dataset` from a score file or directory.

    A file holds the base scores; a directory holds base.csv plus optional
    perturbed_<feature>.csv tables (row order = perturbed-set row order).
    Classification columns are matched to the dataset's class names.
    """
    if os.path.isdir(path):
        base_path = os.path.join(path, "base.csv")
        if not os.path.exists(base_path):
            raise DataError(f"{path}: missing base.csv score file")
    else:
        base_path = path
    cols, ids, values = _read_score_csv(base_path)
    if dataset.target_kind == NUMERIC:
        if len(cols) != 1:
            raise DataError(f"{base_path}: regression scores need exactly one "
                            f"prediction column, got {len(cols)}")
        task, order = REGRESSION, None
        base = values[:, 0]
        names = ()
    else:
        names = dataset.target_categories
        if sorted(cols) != sorted(names):
            raise DataError(f"{base_path}: score columns {cols} do not match "
                            f"classes {list(names)}")
        order = [cols.index(c) for c in names]
        base = values[:, order]
        task = BINARY if len(names) == 2 else MULTICLASS
    perturbed = {}
    if os.path.isdir(path):
        for f in dataset.schema:
            p = os.path.join(path, f"perturbed_{f.name}.csv")
            if not os.path.exists(p):
                continue
            pcols, pids, pvalues = _read_score_csv(p)
            if list(pids) != list(range(len(pids))):
                raise DataError(f"{p}: row indices must be 0..n-1 in "
                                f"perturbed-set order")
            if task == REGRESSION:
                perturbed[f.name] = pvalues[:, 0]
            else:
                if sorted(pcols) != sorted(names):
                    raise DataError(f"{p}: score columns do not match classes")
                perturbed[f.name] = pvalues[:, [pcols.index(c) for c in names]]
    return ExternalScores(task, ids, base, names, perturbed)


def model_outputs(model, dataset):
    """Model outputs for a Dataset's rows, however the model gets them."""
    if isinstance(model, ExternalScores):
        return model.lookup(dataset.row_ids)
    return model.predict(dataset.X)


def perturbed_outputs(model, feature_name, Xp):
    """Model outputs for one feature's perturbed calibration matrix."""
    if isinstance(model, ExternalScores):
        table = model.perturbed.get(feature_name)
        if table is None:
            raise ConfigError(
                f"no perturbed scores stored for feature {feature_name!r}; "
                f"fast initialization with external scores needs "
                f"perturbed_<feature>.csv files, or use a built-in model")
        if len(table) != len(Xp):
            raise DataError(f"perturbed scores for {feature_name!r} have "
                            f"{len(table)} rows, expected {len(Xp)}")
        return table
    return model.predict(Xp)
