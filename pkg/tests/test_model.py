import numpy as np
import pytest

from fwsvm import (
    KernelSpec,
    ModelFormatError,
    SelectionStrategy,
    SolverConfig,
    SparseDataset,
    SparseRow,
    SvmModel,
    evaluate,
    load_model,
    predict,
    predict_dataset,
    save_model,
    solve,
    two_clusters,
)
from helpers import rand_dataset


def _point(*coords):
    vals = np.asarray(coords, dtype=np.float64)
    return SparseRow(np.arange(len(coords), dtype=np.int64), vals)


def _separable_20():
    # two tight clusters around (0,0) and (5,5)
    rng = np.random.default_rng(0)
    rows, labels = [], []
    for i in range(20):
        y = 1 if i % 2 == 0 else -1
        center = 5.0 if y > 0 else 0.0
        rows.append(_point(*(center + 0.2 * rng.normal(size=2))))
        labels.append(y)
    return SparseDataset(rows, labels)


def test_from_iterate_positive_coordinates():
    rng = np.random.default_rng(1)
    ds = rand_dataset(10, 4, rng)
    alpha = np.zeros(10)
    alpha[[2, 5, 9]] = (0.25, 0.5, 0.25)
    model = SvmModel.from_iterate(alpha, ds, KernelSpec(gamma=0.5))
    assert model.support.tolist() == [2, 5, 9]
    assert model.weights.tolist() == [0.25, 0.5, 0.25]
    assert model.sv_count == 3
    assert np.array_equal(model.labels, ds.labels[[2, 5, 9]])


def test_from_iterate_rejects_empty():
    rng = np.random.default_rng(2)
    ds = rand_dataset(4, 3, rng)
    with pytest.raises(ValueError):
        SvmModel.from_iterate(np.zeros(4), ds, KernelSpec(gamma=1.0))


def test_single_positive_sv_predicts_positive_everywhere():
    ds = SparseDataset([_point(1.0, 2.0)], [1])
    model = SvmModel.from_iterate(np.array([1.0]), ds, KernelSpec(gamma=0.5))
    rng = np.random.default_rng(3)
    for _ in range(20):
        q = _point(*rng.normal(scale=10.0, size=2))
        assert predict(model, q) == 1
        assert model.decision_value(q) > 0.0


def test_separable_instance_trains_to_full_accuracy():
    ds = _separable_20()
    model, _, summary = solve(
        ds,
        KernelSpec(gamma=0.5, c=1.0),
        SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=0),
    )
    assert summary.gap_exact_final <= 1e-4
    assert evaluate(model, ds) == 1.0


def test_label_flip_negates_predictions():
    ds = _separable_20()
    flipped = SparseDataset(ds.rows, -ds.labels)
    spec = KernelSpec(gamma=0.5, c=1.0)
    cfg = SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=0)
    model_a, _, _ = solve(ds, spec, cfg)
    model_b, _, _ = solve(flipped, spec, cfg)
    rng = np.random.default_rng(4)
    for _ in range(25):
        q = _point(*rng.normal(scale=4.0, size=2))
        da = model_a.decision_value(q)
        db = model_b.decision_value(q)
        assert da == -db
        if da != 0.0:
            assert predict(model_a, q) == -predict(model_b, q)


def test_sign_zero_maps_to_positive():
    # two mirrored SVs with opposite labels and equal weights: the decision
    # value at the midpoint is exactly zero by symmetry
    ds = SparseDataset([_point(-1.0), _point(1.0)], [1, -1])
    model = SvmModel.from_iterate(np.array([0.5, 0.5]), ds, KernelSpec(gamma=1.0))
    origin = SparseRow(np.array([], dtype=np.int64), np.array([]))
    assert model.decision_value(origin) == 0.0
    assert predict(model, origin) == 1


def test_random_labels_near_chance():
    rng = np.random.default_rng(5)
    train = rand_dataset(60, 4, rng)
    model, _, _ = solve(
        train,
        KernelSpec(gamma=0.5, c=1.0),
        SolverConfig(strategy=SelectionStrategy(), epsilon=1e-3, max_iters=20000, seed=1),
    )
    m_test = 2000
    test_rows = [
        SparseRow(np.arange(4, dtype=np.int64), rng.normal(size=4)) for _ in range(m_test)
    ]
    test = SparseDataset(test_rows, rng.choice(np.array([-1, 1]), size=m_test))
    acc = evaluate(model, test)
    sigma = 0.5 / np.sqrt(m_test)
    assert abs(acc - 0.5) <= 3.0 * sigma


def test_evaluate_single_point():
    ds = SparseDataset([_point(1.0)], [1])
    model = SvmModel.from_iterate(np.array([1.0]), ds, KernelSpec(gamma=1.0))
    assert evaluate(model, ds) == 1.0


def test_predict_dataset_matches_pointwise():
    ds = _separable_20()
    model, _, _ = solve(
        ds,
        KernelSpec(gamma=0.5, c=1.0),
        SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=0),
    )
    batched = predict_dataset(model, ds)
    single = np.array([predict(model, r) for r in ds.rows])
    assert np.array_equal(batched, single)


def test_queries_wider_than_model_dim():
    # unseen feature indices contribute only through the query's own norm
    ds = SparseDataset([_point(1.0)], [1])
    model = SvmModel.from_iterate(np.array([1.0]), ds, KernelSpec(gamma=0.5))
    q = SparseRow(np.array([0, 5], dtype=np.int64), np.array([1.0, 2.0]))
    expected = 1.0 * (np.exp(-0.5 * 4.0) + 1.0)
    assert model.decision_value(q) == pytest.approx(expected, rel=1e-12)


def test_save_load_round_trip(tmp_path):
    ds = _separable_20()
    spec = KernelSpec(gamma=0.5, c=0.7)
    model, _, _ = solve(
        ds, spec, SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=2)
    )
    path = tmp_path / "model.txt"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.support, model.support)
    assert np.array_equal(back.weights, model.weights)  # repr round-trip is exact
    assert np.array_equal(back.labels, model.labels)
    assert back.spec == model.spec
    assert back.dim == model.dim
    for a, b in zip(model.rows, back.rows):
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.values, b.values)
    rng = np.random.default_rng(6)
    for _ in range(10):
        q = _point(*rng.normal(size=2))
        assert back.decision_value(q) == model.decision_value(q)


def test_load_model_rejects_garbage(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("not a model\n")
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(p)


def test_load_model_rejects_truncation(tmp_path):
    ds = _separable_20()
    model, _, _ = solve(
        ds,
        KernelSpec(gamma=0.5, c=1.0),
        SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=0),
    )
    path = tmp_path / "model.txt"
    save_model(model, path)
    lines = path.read_text().splitlines()
    (tmp_path / "short.txt").write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(ModelFormatError, match="truncated"):
        load_model(tmp_path / "short.txt")


def test_load_model_rejects_bad_weight_sum(tmp_path):
    p = tmp_path / "sum.txt"
    p.write_text(
        "fwsvm-model 1\n"
        "mode l2svm-effective\n"
        "gamma 0.5\n"
        "c 1.0\n"
        "dim 2\n"
        "nsv 1\n"
        "0 0.25 +1\n"
        "vectors\n"
        "1:1.0\n"
    )
    with pytest.raises(ModelFormatError, match="sum"):
        load_model(p)


def test_load_model_rejects_bad_numeric_field(tmp_path):
    p = tmp_path / "num.txt"
    p.write_text(
        "fwsvm-model 1\n"
        "mode l2svm-effective\n"
        "gamma spam\n"
        "c 1.0\n"
        "dim 2\n"
        "nsv 0\n"
        "vectors\n"
    )
    with pytest.raises(ModelFormatError):
        load_model(p)


def test_synthetic_clusters_learnable():
    train = two_clusters(400, seed=7)
    test = two_clusters(200, seed=8)
    model, _, _ = solve(
        train,
        KernelSpec(gamma=0.25, c=1.0),
        SolverConfig(strategy=SelectionStrategy(), epsilon=1e-4, seed=0),
    )
    # flip noise is 3%, so a sound model sits well above 90%
    assert evaluate(model, test) >= 0.9
