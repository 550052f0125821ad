import numpy as np
import pytest

from calex.dataset import (CATEGORICAL, NUMERIC, Dataset, FeatureSchema,
                           load_csv, save_csv, split_dataset)
from calex.errors import DataError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_load_infers_kinds_and_codes(tmp_path):
    p = write(tmp_path, "a,b,c\n1.0,red,x\n2.5,blue,y\n3,red,x\n")
    d = load_csv(p)
    assert [f.kind for f in d.schema] == [NUMERIC, CATEGORICAL]
    assert d.schema[1].categories == ("red", "blue")
    assert np.array_equal(d.X[:, 0], [1.0, 2.5, 3.0])
    assert np.array_equal(d.X[:, 1], [0, 1, 0])
    assert d.target_kind == CATEGORICAL
    assert d.target_categories == ("x", "y")
    assert np.array_equal(d.y, [0, 1, 0])
    assert d.task == "binary"


def test_numeric_target_means_regression(tmp_path):
    p = write(tmp_path, "a,t\n1,2.0\n2,4.0\n")
    d = load_csv(p)
    assert d.task == "regression"
    assert np.array_equal(d.y, [2.0, 4.0])


def test_target_override(tmp_path):
    p = write(tmp_path, "a,t\n1,2.0\n2,4.0\n")
    d = load_csv(p, target="a")
    assert d.target_name == "a"
    assert d.feature_names() == ["t"]


def test_schema_hints(tmp_path):
    p = write(tmp_path, "a,t\n1,0\n2,1\n")
    d = load_csv(p, {"t": CATEGORICAL, "a": CATEGORICAL})
    assert d.task == "binary"
    assert d.schema[0].kind == CATEGORICAL
    assert d.target_categories == ("0", "1")


def test_hinted_numeric_failure_names_row(tmp_path):
    p = write(tmp_path, "a,t\n1,2.0\nx,4.0\n")
    with pytest.raises(DataError, match=r"row 3"):
        load_csv(p, {"a": NUMERIC})


def test_error_messages_name_location(tmp_path):
    with pytest.raises(DataError, match="empty file"):
        load_csv(write(tmp_path, "", "e.csv"))
    with pytest.raises(DataError, match="no data rows"):
        load_csv(write(tmp_path, "a,b\n", "h.csv"))
    with pytest.raises(DataError, match=r"row 3 has 1 cells"):
        load_csv(write(tmp_path, "a,b\n1,2\n3\n", "r.csv"))
    with pytest.raises(DataError, match=r"row 2, column 'b'"):
        load_csv(write(tmp_path, "a,b\n1,\n", "m.csv"))
    with pytest.raises(DataError, match="no column named 'z'"):
        load_csv(write(tmp_path, "a,b\n1,2\n", "t.csv"), target="z")


def test_non_finite_token_is_categorical(tmp_path):
    p = write(tmp_path, "a,t\nnan,1.0\ninf,2.0\n")
    d = load_csv(p)
    assert d.schema[0].kind == CATEGORICAL
    assert d.schema[0].categories == ("nan", "inf")


def test_round_trip_bit_equal(tmp_path):
    g = np.random.default_rng(5)
    X = g.normal(size=(20, 2)) * 1e7
    codes = g.integers(0, 3, size=20).astype(np.float64)
    schema = [FeatureSchema("n0", NUMERIC), FeatureSchema("n1", NUMERIC),
              FeatureSchema("c", CATEGORICAL, ("a", "b", "c"))]
    d = Dataset(schema, np.column_stack([X, codes]), g.normal(size=20))
    p = str(tmp_path / "rt.csv")
    save_csv(d, p)
    d2 = load_csv(p)
    assert np.array_equal(d.X, d2.X)
    assert np.array_equal(d.y, d2.y)
    assert [f.kind for f in d2.schema] == [f.kind for f in d.schema]
    assert d2.schema[2].categories == ("a", "b", "c")


def test_immutable_and_validated():
    d = Dataset([FeatureSchema("a", NUMERIC)], [[1.0], [2.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        d.X[0, 0] = 9
    with pytest.raises(DataError):
        Dataset([FeatureSchema("a", NUMERIC)], [[1.0, 2.0]], [0.0])
    with pytest.raises(DataError):
        Dataset([FeatureSchema("a", NUMERIC)], [[1.0]], [0.0, 1.0])
    with pytest.raises(DataError):
        Dataset([FeatureSchema("a", NUMERIC), FeatureSchema("a", NUMERIC)],
                [[1.0, 2.0]], [0.0])


def test_split_sizes_and_determinism():
    d = Dataset([FeatureSchema("a", NUMERIC)],
                np.arange(100.0)[:, None], np.zeros(100))
    s1 = split_dataset(d, 0.5, 0.25, seed=9)
    s2 = split_dataset(d, 0.5, 0.25, seed=9)
    assert (len(s1.proper_training), len(s1.calibration), len(s1.test)) == \
        (50, 25, 25)
    assert np.array_equal(s1.proper_training.row_ids,
                          s2.proper_training.row_ids)
    assert np.array_equal(s1.test.row_ids, s2.test.row_ids)
    all_ids = np.concatenate([s1.proper_training.row_ids,
                              s1.calibration.row_ids, s1.test.row_ids])
    assert sorted(all_ids) == list(range(100))
    s3 = split_dataset(d, 0.5, 0.25, seed=10)
    assert not np.array_equal(s1.test.row_ids, s3.test.row_ids)


def test_split_tiny_and_errors():
    d = Dataset([FeatureSchema("a", NUMERIC)],
                np.arange(4.0)[:, None], np.zeros(4))
    s = split_dataset(d, 0.5, 0.25, seed=1)
    assert (len(s.proper_training), len(s.calibration), len(s.test)) == \
        (2, 1, 1)
    tiny = Dataset([FeatureSchema("a", NUMERIC)], [[1.0]], [0.0])
    with pytest.raises(DataError):
        split_dataset(tiny, 0.5, 0.25, seed=1)
    with pytest.raises(DataError):
        split_dataset(d, 0.8, 0.3, seed=1)
    with pytest.raises(DataError):
        split_dataset(d, 0.0, 0.5, seed=1)


def test_subset_keeps_row_ids():
    d = Dataset([FeatureSchema("a", NUMERIC)],
                np.arange(10.0)[:, None], np.zeros(10))
    s = d.subset([7, 2, 5])
    assert list(s.row_ids) == [7, 2, 5]
    assert list(s.X[:, 0]) == [7.0, 2.0, 5.0]
