import numpy as np
import pytest

from fwsvm import (
    DatasetFormatError,
    SparseDataset,
    SparseRow,
    parse_libsvm,
    parse_libsvm_text,
    save_libsvm,
    subsample,
    to_libsvm,
)
from helpers import rand_dataset


def test_parse_two_lines():
    ds = parse_libsvm_text("+1 1:0.5 3:1.0\n-1 2:2.0\n")
    assert ds.m == 2
    assert ds.dim == 3
    assert ds.labels.tolist() == [1, -1]
    assert ds.rows[0].indices.tolist() == [0, 2]
    assert ds.rows[0].values.tolist() == [0.5, 1.0]
    assert ds.rows[1].indices.tolist() == [1]
    assert ds.rows[1].values.tolist() == [2.0]


def test_parse_integer_label_tokens():
    ds = parse_libsvm_text("1 1:1\n-1 1:2\n")
    assert ds.labels.tolist() == [1, -1]


def test_parse_row_without_features():
    ds = parse_libsvm_text("+1\n-1 1:1\n")
    assert ds.rows[0].nnz == 0
    assert ds.dim == 1


def test_parse_non_ascending_index_rejected():
    with pytest.raises(DatasetFormatError, match="line 1"):
        parse_libsvm_text("+1 3:1 1:1\n")


def test_parse_duplicate_index_rejected():
    with pytest.raises(DatasetFormatError, match="ascending"):
        parse_libsvm_text("+1 2:1 2:3\n")


def test_parse_zero_index_rejected():
    with pytest.raises(DatasetFormatError, match="1-based"):
        parse_libsvm_text("+1 0:1\n")


def test_parse_empty_input_rejected():
    with pytest.raises(DatasetFormatError, match="empty"):
        parse_libsvm_text("")


def test_parse_bad_label_reports_line_number():
    with pytest.raises(DatasetFormatError, match="line 2") as ei:
        parse_libsvm_text("+1 1:1\nspam 1:1\n")
    assert ei.value.line_no == 2


def test_parse_label_zero_needs_remap_flag():
    with pytest.raises(DatasetFormatError, match="remap"):
        parse_libsvm_text("0 1:1\n")
    ds = parse_libsvm_text("0 1:1\n1 1:2\n", remap01=True)
    assert ds.labels.tolist() == [-1, 1]


def test_parse_other_numeric_labels_rejected():
    with pytest.raises(DatasetFormatError, match="label"):
        parse_libsvm_text("3 1:1\n")


def test_parse_bad_feature_tokens():
    with pytest.raises(DatasetFormatError, match="feature token"):
        parse_libsvm_text("+1 1:abc\n")
    with pytest.raises(DatasetFormatError, match="feature token"):
        parse_libsvm_text("+1 notafeature\n")
    with pytest.raises(DatasetFormatError, match="non-finite"):
        parse_libsvm_text("+1 1:nan\n")
    with pytest.raises(DatasetFormatError, match="non-finite"):
        parse_libsvm_text("+1 1:inf\n")


def test_parse_comment_rejected():
    with pytest.raises(DatasetFormatError, match="comment"):
        parse_libsvm_text("# header\n+1 1:1\n")


def test_parse_blank_line_rejected():
    with pytest.raises(DatasetFormatError, match="blank"):
        parse_libsvm_text("+1 1:1\n\n-1 1:2\n")


def test_sparse_row_validation():
    with pytest.raises(ValueError, match="ascending"):
        SparseRow(np.array([2, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="finite"):
        SparseRow(np.array([0]), np.array([np.inf]))
    with pytest.raises(ValueError, match="non-negative"):
        SparseRow(np.array([-1]), np.array([1.0]))
    with pytest.raises(ValueError, match="equal length"):
        SparseRow(np.array([0, 1]), np.array([1.0]))


def test_sparse_row_arrays_frozen():
    row = SparseRow(np.array([0, 3]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        row.values[0] = 9.0
    with pytest.raises(ValueError):
        row.indices[0] = 9


def test_dataset_label_validation():
    row = SparseRow(np.array([0]), np.array([1.0]))
    with pytest.raises(ValueError, match="labels"):
        SparseDataset([row], [0])
    with pytest.raises(ValueError, match="mismatch"):
        SparseDataset([row, row], [1])
    with pytest.raises(ValueError, match="empty"):
        SparseDataset([], [])


def test_dim_follows_largest_index():
    ds = parse_libsvm_text("+1 5:1.0\n")
    assert ds.dim == 5
    assert ds.to_csr().shape == (1, 5)


def test_to_csr_matches_rows():
    rng = np.random.default_rng(0)
    ds = rand_dataset(30, 7, rng)
    X = ds.to_csr()
    assert X.shape == (30, 7)
    for i, row in enumerate(ds.rows):
        dense = np.zeros(7)
        dense[row.indices] = row.values
        assert np.array_equal(np.asarray(X[i].todense()).ravel(), dense)


def test_round_trip_exact():
    rng = np.random.default_rng(1)
    ds = rand_dataset(50, 9, rng)
    back = parse_libsvm_text(to_libsvm(ds))
    assert back.m == ds.m
    assert np.array_equal(back.labels, ds.labels)
    for a, b in zip(ds.rows, back.rows):
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.values, b.values)  # bitwise, via repr round-trip


def test_file_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    ds = rand_dataset(20, 5, rng)
    path = tmp_path / "data.libsvm"
    save_libsvm(ds, path)
    back = parse_libsvm(path)
    assert to_libsvm(back) == to_libsvm(ds)


def test_subsample_identity():
    rng = np.random.default_rng(3)
    ds = rand_dataset(5, 3, rng)
    assert subsample(ds, 5, seed=123) is ds


def test_subsample_deterministic():
    rng = np.random.default_rng(4)
    ds = rand_dataset(5, 3, rng)
    a = subsample(ds, 1, seed=7)
    b = subsample(ds, 1, seed=7)
    assert a.rows[0] is b.rows[0]
    assert a.labels[0] == b.labels[0]


def test_subsample_seeds_differ():
    rng = np.random.default_rng(5)
    ds = rand_dataset(100, 4, rng)
    rows1 = subsample(ds, 50, seed=1).rows
    rows2 = subsample(ds, 50, seed=2).rows
    assert set(map(id, rows1)) != set(map(id, rows2))


def test_subsample_preserves_order():
    rng = np.random.default_rng(6)
    ds = rand_dataset(40, 4, rng)
    sub = subsample(ds, 15, seed=9)
    ids = [id(r) for r in ds.rows]
    pos = [ids.index(id(r)) for r in sub.rows]
    assert pos == sorted(pos)


def test_subsample_range_checks():
    rng = np.random.default_rng(7)
    ds = rand_dataset(5, 3, rng)
    with pytest.raises(ValueError):
        subsample(ds, 0, seed=0)
    with pytest.raises(ValueError):
        subsample(ds, 6, seed=0)
