import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rejectlab.data import (
    Dataset,
    GaussianSpec,
    Standardizer,
    generate_gaussians,
    generate_imbalanced_proxy,
    load_csv,
    load_haberman,
    make_fold_plan,
    minority_class,
    standardize,
    write_csv,
)
from rejectlab.errors import DataError, StratificationError


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_minimal_csv(tmp_path):
    d = load_csv(_write(tmp_path, "a,b,cls\n1.0,2.0,x\n3,4,y\n"), "cls")
    assert len(d) == 2 and d.n_classes == 2
    assert d.class_names == ("x", "y")
    assert d.y.tolist() == [1, 2]
    assert d.feature_names == ("a", "b")


def test_labels_follow_first_appearance(tmp_path):
    d = load_csv(_write(tmp_path, "f,label\n0,b\n1,a\n2,b\n3,c\n"), "label", positive_class="a")
    assert d.class_names == ("b", "a", "c")
    assert d.y.tolist() == [1, 2, 1, 3]
    assert d.positive_class == 2


def test_label_column_by_index(tmp_path):
    d = load_csv(_write(tmp_path, "label,f\nu,1\nv,2\n"), 0)
    assert d.class_names == ("u", "v")
    assert d.X[:, 0].tolist() == [1.0, 2.0]


def test_text_cell_reports_row_and_column(tmp_path):
    p = _write(tmp_path, "a,b,cls\n1,2,x\n3,oops,y\n")
    with pytest.raises(DataError, match=r"line 3.*'b'"):
        load_csv(p, "cls")


@pytest.mark.parametrize(
    "text, kwargs, match",
    [
        ("a,cls\n1,x\n2,x\n", {}, "single class"),
        ("a,cls\n1,x\n2,y\n", {"positive_class": "z"}, "positive class"),
        ("a,cls\n1,x\n2,y\n", {"label_column": "nope"}, "nope"),
    ],
)
def test_load_csv_errors(tmp_path, text, kwargs, match):
    kwargs.setdefault("label_column", "cls")
    with pytest.raises(DataError, match=match):
        load_csv(_write(tmp_path, text), **kwargs)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_csv(tmp_path / "absent.csv")


def test_haberman_counts():
    d = load_haberman()
    assert len(d) == 306 and d.n_features == 3
    assert d.class_counts().tolist() == [225, 81]
    assert d.resolve_positive() == 2


def test_write_then_load_round_trip(tmp_path, rng):
    d = Dataset(rng.standard_normal((20, 3)), rng.integers(1, 3, 20), ("neg", "pos"))
    write_csv(d, tmp_path / "out.csv")
    back = load_csv(tmp_path / "out.csv", "label")
    assert np.array_equal(back.X, d.X)
    assert [back.class_names[c - 1] for c in back.y] == [d.class_names[c - 1] for c in d.y]


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [1, 1], ("a",))
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [1, 3], ("a", "b"))
    with pytest.raises(DataError):
        Dataset([[np.inf], [0]], [1, 2])
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [1, 2], positive_class=3)


def test_minority_class_ties_go_low():
    assert minority_class(np.array([1, 2, 2, 1]), 2) == 1
    assert minority_class(np.array([1, 1, 2, 3, 3]), 3) == 2


def test_standardize_hand_values():
    d = Dataset(np.array([[1.0], [2.0], [3.0]]), [1, 2, 1])
    z, rec = standardize(d)
    # population std of (1, 2, 3) is sqrt(2/3)
    assert np.allclose(z.X[:, 0], [-1.2247, 0.0, 1.2247], atol=1e-4)
    assert rec.std[0] == pytest.approx(math.sqrt(2 / 3))


def test_standardize_constant_column():
    d = Dataset(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]), [1, 2, 1])
    z, rec = standardize(d)
    assert z.X[:, 0].tolist() == [0.0, 0.0, 0.0]
    assert rec.constant.tolist() == [True, False]


def test_standardizer_applies_training_statistics(rng):
    train = rng.normal(3.0, 2.0, (50, 2))
    rec = Standardizer.fit(train)
    test = rng.normal(3.0, 2.0, (10, 2))
    assert np.allclose(rec.transform(test), (test - train.mean(0)) / train.std(0))
    assert np.array_equal(Standardizer.from_dict(rec.to_dict()).transform(test), rec.transform(test))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 40), st.integers(1, 4))
def test_standardize_idempotent(seed, n, f):
    g = np.random.default_rng(seed)
    X = g.normal(g.uniform(-5, 5, f), g.uniform(0.1, 10, f), (n, f))
    X[:, 0] = 2.5  # one constant column
    once, _ = standardize(Dataset(X, np.arange(n) % 2 + 1))
    twice, _ = standardize(once)
    assert np.allclose(once.X, twice.X, atol=1e-9, rtol=0)
    free = once.X[:, 1:]
    assert np.allclose(free.mean(0), 0, atol=1e-9) and np.allclose(free.std(0), 1, atol=1e-9)


def test_reference_gaussian_means():
    spec = GaussianSpec.reference(samples_per_class=1000, noise_fraction=0.0)
    d = generate_gaussians(spec, 0)
    for c, (mean, std) in enumerate(zip(spec.means, spec.stds), start=1):
        tol = 3 * std / math.sqrt(1000)
        assert np.all(np.abs(d.X[d.y == c].mean(0) - mean) <= tol)
    assert np.array_equal(spec.means, [[-4, 4.5], [4, 0.5]])
    assert np.array_equal(spec.stds, [[5.2, 7.1], [2.5, 2.1]])


def test_gaussian_tiny_variance_collapses_to_means():
    spec = GaussianSpec([[0, 0], [3, 1]], [[1e-9, 1e-9], [1e-9, 1e-9]], 50, 0.0)
    d = generate_gaussians(spec, 1)
    assert np.allclose(d.X[d.y == 1], [0, 0], atol=1e-6)
    assert np.allclose(d.X[d.y == 2], [3, 1], atol=1e-6)


def test_generation_is_deterministic():
    spec = GaussianSpec.reference(200)
    a, b = generate_gaussians(spec, 9), generate_gaussians(spec, 9)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.X, generate_gaussians(spec, 10).X)
    assert a.class_counts().tolist() == [200, 200]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.floats(0.0, 0.99), st.integers(0, 10**6))
def test_noise_replaces_exact_share(n, frac, seed):
    # points that moved off the (near-zero width) Gaussians are the uniform replacements
    spec = GaussianSpec([[0, 0], [1, 1]], [[1e-12, 1e-12], [1e-12, 1e-12]], n, frac, box=([10, 10], [20, 20]))
    d = generate_gaussians(spec, seed)
    for c, mean in ((1, [0, 0]), (2, [1, 1])):
        moved = np.any(np.abs(d.X[d.y == c] - mean) > 1e-6, axis=1)
        assert moved.sum() == math.floor(frac * n)


def test_default_box_is_union_of_three_sigma():
    spec = GaussianSpec.reference()
    assert np.allclose(spec.box[0], [-4 - 15.6, 4.5 - 21.3])
    assert np.allclose(spec.box[1], [max(-4 + 15.6, 4 + 7.5), 4.5 + 21.3])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(means=[[0, 0]], stds=[[1, 1]]),
        dict(means=[[0, 0], [1, 1]], stds=[[1, 0], [1, 1]]),
        dict(means=[[0, 0], [1, 1]], stds=[[1, 1], [1, 1]], noise_fraction=1.0),
        dict(means=[[0, 0], [1, 1]], stds=[[1, 1], [1, 1]], box=([0, 0], [0, 1])),
    ],
)
def test_invalid_gaussian_spec(kwargs):
    with pytest.raises(DataError):
        GaussianSpec(**kwargs)


def test_imbalanced_proxy_shape():
    d = generate_imbalanced_proxy(0)
    assert d.class_counts().tolist() == [102, 45]
    assert d.n_features == 32
    assert d.positive_class == 2


def test_fold_plan_exact_balance():
    y = np.repeat([1, 2], 50)
    plan = make_fold_plan(y, k=10, repeats=1, seed=0)
    for f in range(10):
        test = plan.test_index(0, f)
        assert np.bincount(y[test], minlength=3)[1:].tolist() == [5, 5]


def test_fold_plan_haberman_sizes():
    d = load_haberman()
    plan = make_fold_plan(d, 10, 1, 4)
    share = 81 / 306
    for f in range(10):
        test = plan.test_index(0, f)
        assert len(test) in (30, 31)
        assert abs(np.sum(d.y[test] == 2) - share * len(test)) <= 1


def test_fold_plan_repeats_differ_and_are_reproducible():
    y = np.repeat([1, 2], 40)
    plan = make_fold_plan(y, 4, 10, 3)
    rows = {tuple(r) for r in plan.assignment}
    assert len(rows) == 10
    assert np.array_equal(plan.assignment, make_fold_plan(y, 4, 10, 3).assignment)
    assert len(plan) == 40 and len(list(plan)) == 40


def test_fold_plan_small_class():
    with pytest.raises(StratificationError, match="fewer than 10"):
        make_fold_plan(np.array([1] * 20 + [2] * 9), 10, 1, 0)
    with pytest.raises(DataError):
        make_fold_plan(np.array([1, 2] * 5), 1, 1, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(1, 3), st.lists(st.integers(8, 30), min_size=2, max_size=4), st.integers(0, 10**6))
def test_fold_plan_partitions(k, repeats, sizes, seed):
    y = np.concatenate([np.full(s, c + 1) for c, s in enumerate(sizes)])
    plan = make_fold_plan(y, k, repeats, seed)
    for r in range(repeats):
        tests = [plan.test_index(r, f) for f in range(k)]
        joined = np.sort(np.concatenate(tests))
        assert np.array_equal(joined, np.arange(y.size))
        sizes_f = [len(t) for t in tests]
        assert max(sizes_f) - min(sizes_f) <= 1
        for f, t in enumerate(tests):
            assert np.intersect1d(t, plan.train_index(r, f)).size == 0
            for c in range(1, len(sizes) + 1):
                expected = np.sum(y == c) * len(t) / y.size
                assert abs(np.sum(y[t] == c) - expected) <= 1 + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(2, 60), min_size=2, max_size=5), st.integers(2, 10))
def test_stratified_counts_margins(sizes, k):
    from rejectlab.data import stratified_counts

    counts = stratified_counts(sizes, k)
    total = sum(sizes)
    assert counts.sum(axis=1).tolist() == sizes
    fold_sizes = counts.sum(axis=0)
    assert fold_sizes.max() - fold_sizes.min() <= 1
    target = np.outer(sizes, fold_sizes) / total
    assert np.all(np.abs(counts - target) < 1)
