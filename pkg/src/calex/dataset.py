"""Tabular data model: CSV ingestion, schema inference, deterministic splits.

A Dataset stores one float64 matrix; categorical cells hold integer
category codes (assigned in first-appearance order during ingestion) and
the schema remembers the original tokens.  Datasets are immutable after
construction and safe to share across workers.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from . import rng

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    categories: tuple = ()  # original tokens, index = category code


@dataclass(frozen=True)
class Split:
    proper_training: "Dataset"
    calibration: "Dataset"
    test: "Dataset"
    seed: int


class Dataset:
    """Immutable tabular dataset with a feature schema and a target.

    Parameters
    ----------
    schema : list of FeatureSchema
    X : ndarray of shape (n, n_features)
        Numeric values, or float-stored category codes for categorical
        features.
    y : ndarray of shape (n,)
        float64 targets (regression) or int64 class codes (classification).
    target_name : str
    target_kind : str
        NUMERIC or CATEGORICAL.
    target_categories : tuple of str
        Class tokens, index = class code (classification only).
    row_ids : ndarray of shape (n,), optional
        Stable row identities (defaults to 0..n-1); subsets keep them.
    """

    def __init__(self, schema, X, y, target_name="target", target_kind=NUMERIC,
                 target_categories=(), row_ids=None):
        self.schema = list(schema)
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        if target_kind == CATEGORICAL:
            self.y = np.ascontiguousarray(y, dtype=np.int64)
        else:
            self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.target_name = target_name
        self.target_kind = target_kind
        self.target_categories = tuple(target_categories)
        if row_ids is None:
            row_ids = np.arange(len(self.X), dtype=np.int64)
        self.row_ids = np.ascontiguousarray(row_ids, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.schema):
            raise DataError("row width does not match schema")
        if len(self.y) != len(self.X) or len(self.row_ids) != len(self.X):
            raise DataError("targets/row ids do not match row count")
        names = [f.name for f in self.schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate feature names")
        for arr in (self.X, self.y, self.row_ids):
            arr.flags.writeable = False

    def __len__(self):
        return len(self.X)

    @property
    def n_features(self):
        return len(self.schema)

    @property
    def n_classes(self):
        return len(self.target_categories)

    @property
    def task(self):
        if self.target_kind == NUMERIC:
            return "regression"
        return "binary" if self.n_classes == 2 else "multiclass"

    def feature_names(self):
        return [f.name for f in self.schema]

    def subset(self, indices):
        return Dataset(self.schema, self.X[indices], self.y[indices],
                       self.target_name, self.target_kind,
                       self.target_categories, self.row_ids[indices])

    def display_value(self, row, col):
        """Instance value as shown to users: token for categoricals."""
        f = self.schema[col]
        v = self.X[row, col]
        if f.kind == CATEGORICAL:
            return f.categories[int(v)]
        return float(v)


def _parse_numeric(token):
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, schema_hints=None, target=None):
    """Load a comma-separated UTF-8 file with a header row.

    The target is the last column unless `target` names another one.  A
    column is numeric when every cell parses as a finite decimal number,
    otherwise categorical with codes in first-appearance order.
    `schema_hints` maps column names to "numeric"/"categorical" overrides.

    Raises
    ------
    DataError
        Empty file, ragged rows, empty cells, or a hinted-numeric column
        that does not parse; messages name the offending row/column.
    """
    schema_hints = schema_hints or {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 2} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            if cell == "":
                raise DataError(f"{path}: missing value at row {i + 2}, column {header[j]!r}")

    if target is None:
        t_idx = width - 1
    else:
        try:
            t_idx = header.index(target)
        except ValueError:
            raise DataError(f"{path}: no column named {target!r}") from None

    columns = list(zip(*rows))
    schema = []
    feat_cols = []
    for j in range(width):
        if j == t_idx:
            continue
        name = header[j]
        tokens = columns[j]
        hint = schema_hints.get(name)
        values = [_parse_numeric(t) for t in tokens]
        numeric = all(v is not None for v in values)
        if hint == NUMERIC and not numeric:
            bad = values.index(None)
            raise DataError(f"{path}: column {name!r} hinted numeric but row {bad + 2} "
                            f"has {tokens[bad]!r}")
        if numeric and hint != CATEGORICAL:
            schema.append(FeatureSchema(name, NUMERIC))
            feat_cols.append(np.array(values, dtype=np.float64))
        else:
            cats, codes = _encode_first_appearance(tokens)
            schema.append(FeatureSchema(name, CATEGORICAL, cats))
            feat_cols.append(codes.astype(np.float64))

    t_name = header[t_idx]
    t_tokens = columns[t_idx]
    t_hint = schema_hints.get(t_name)
    t_values = [_parse_numeric(t) for t in t_tokens]
    t_numeric = all(v is not None for v in t_values)
    if t_hint == NUMERIC and not t_numeric:
        bad = t_values.index(None)
        raise DataError(f"{path}: target {t_name!r} unparseable at row {bad + 2}: "
                        f"{t_tokens[bad]!r}")
    if t_numeric and t_hint != CATEGORICAL:
        y = np.array(t_values, dtype=np.float64)
        t_kind, t_cats = NUMERIC, ()
    else:
        t_cats, y = _encode_first_appearance(t_tokens)
        t_kind = CATEGORICAL

    X = np.column_stack(feat_cols) if feat_cols else np.empty((len(rows), 0))
    return Dataset(schema, X, y, t_name, t_kind, t_cats)


def _encode_first_appearance(tokens):
    cats = []
    index = {}
    codes = np.empty(len(tokens), dtype=np.int64)
    for i, t in enumerate(tokens):
        if t not in index:
            index[t] = len(cats)
            cats.append(t)
        codes[i] = index[t]
    return tuple(cats), codes


def save_csv(d, path):
    """Write a Dataset back to CSV; load_csv round-trips it bit-equal."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in d.schema] + [d.target_name])
        for i in range(len(d)):
            row = []
            for j, f in enumerate(d.schema):
                v = d.X[i, j]
                row.append(f.categories[int(v)] if f.kind == CATEGORICAL else repr(float(v)))
            if d.target_kind == CATEGORICAL:
                row.append(d.target_categories[int(d.y[i])])
            else:
                row.append(repr(float(d.y[i])))
            writer.writerow(row)


def split_dataset(d, train_frac, cal_frac, seed):
    """Shuffle and partition into proper-training / calibration / test.

    Sizes are floor(n*train_frac) and floor(n*cal_frac) with the remainder
    as test; the shuffle is the library's Fisher-Yates on the stream keyed
    (seed, SPLIT), so identical inputs give an identical Split.
    """
    if train_frac <= 0 or cal_frac <= 0:
        raise DataError("split fractions must be positive")
    if train_frac + cal_frac >= 1:
        raise DataError("train_frac + cal_frac must be < 1")
    n = len(d)
    perm = rng.permutation(n, rng.stream_rng(seed, rng.SPLIT))
    n_train = int(n * train_frac)
    n_cal = int(n * cal_frac)
    parts = (perm[:n_train], perm[n_train:n_train + n_cal], perm[n_train + n_cal:])
    if any(len(p) == 0 for p in parts):
        raise DataError(f"empty partition for n={n}, fractions "
                        f"({train_frac}, {cal_frac})")
    return Split(*(d.subset(p) for p in parts), seed=seed)
