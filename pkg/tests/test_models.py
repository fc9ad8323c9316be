import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import glvq_mu
from rejectlab.data import Dataset
from rejectlab.errors import DimensionMismatchError, ModelStructureError, TrainingDivergenceError
from rejectlab.models import (
    LvqModel,
    TrainConfig,
    Variant,
    glvq_cost,
    load_model,
    model_from_dict,
    model_to_dict,
    posterior,
    posterior_many,
    predict,
    predict_many,
    rslvq_loglik_total,
    save_model,
    train,
)

VARIANTS = [v.value for v in Variant]


def _blobs(rng, n=100, sep=10.0, dim=2):
    mu = np.zeros(dim)
    mu[0] = sep
    X = np.vstack([rng.standard_normal((n, dim)), mu + rng.standard_normal((n, dim))])
    y = np.repeat([1, 2], n)
    return Dataset(X, y)


def _model(variant="glvq", W=((0, 0), (4, 0)), labels=(1, 2), **kw):
    return LvqModel(variant, np.array(W, float), np.array(labels), **kw)


# --- prediction -----------------------------------------------------------------


def test_predict_nearest_prototype():
    m = _model()
    assert predict(m, [1, 0]) == 1
    assert predict(m, [3, 1]) == 2


def test_predict_tie_goes_to_lowest_index():
    m = _model(W=((0, 0), (4, 0), (2, 5)), labels=(2, 1, 1))
    assert predict(m, [2, 0]) == 2


def test_predict_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        predict(_model(), [1, 2, 3])


def test_predict_matches_brute_force(rng):
    W = rng.standard_normal((6, 3))
    labels = np.array([1, 2, 3, 1, 2, 3])
    O = rng.standard_normal((1, 3, 3))
    m = _model("gmlvq", W, labels, omegas=O)
    lam = O[0].T @ O[0]
    for x in rng.standard_normal((100, 3)):
        d = [float((x - w) @ lam @ (x - w)) for w in W]
        assert predict(m, x) == labels[int(np.argmin(d))]


def test_local_metrics_are_used(rng):
    # a stretched local metric makes the far prototype win along the squashed axis
    O = np.array([np.eye(2), np.diag([0.1, 1.0])])
    m = _model("lgmlvq", W=((0, 0), (3, 0)), omegas=O)
    assert predict(m, [1.0, 0]) == 2
    assert predict(_model(), [1.0, 0]) == 1


def test_omega_shape_is_checked():
    with pytest.raises(ModelStructureError, match="shape"):
        _model("gmlvq", omegas=np.ones((2, 2, 2)))
    with pytest.raises(ModelStructureError):
        _model("glvq", omegas=np.ones((1, 2, 2)))
    with pytest.raises(ModelStructureError):
        _model("rslvq")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_predict_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((5, 2))
    labels = np.array([1, 2, 1, 2, 2])
    X = rng.standard_normal((20, 2))
    perm = rng.permutation(5)
    a = predict_many(_model(W=W, labels=labels), X)
    b = predict_many(_model(W=W[perm], labels=labels[perm]), X)
    assert np.array_equal(a, b)


# --- GLVQ cost ------------------------------------------------------------------------


def test_cost_far_correct_limit():
    m = _model(W=((0, 0), (1e6, 0)))
    d = Dataset(np.array([[0.0, 0], [1e6, 1]]), [1, 2])
    assert glvq_cost(m, d) == pytest.approx(-len(d), abs=1e-6)


def test_cost_equidistant_is_zero():
    d = Dataset(np.array([[2.0, 0], [2.0, 3]]), [1, 2])
    assert glvq_cost(_model(), d) == 0.0


def test_cost_matches_direct_formula(rng):
    W = rng.standard_normal((4, 3))
    labels = np.array([1, 2, 1, 2])
    O = rng.standard_normal((4, 3, 3))
    m = _model("lgmlvq", W, labels, omegas=O)
    d = Dataset(rng.standard_normal((30, 3)), rng.integers(1, 3, 30))
    lams = [o.T @ o for o in O]
    want = sum(glvq_mu(x, c, W, labels, lams) for x, c in zip(d.X, d.y))
    assert glvq_cost(m, d) == pytest.approx(want, rel=1e-12)


def test_cost_requires_every_class():
    d = Dataset(np.zeros((3, 2)), [1, 2, 3])
    with pytest.raises(ModelStructureError):
        glvq_cost(_model(), d)


# --- training ---------------------------------------------------------------------------


@pytest.mark.parametrize("variant", VARIANTS)
def test_separable_blobs_are_learned(rng, backend, variant):
    d = _blobs(rng)
    m = train(d, TrainConfig(epochs=30, learning_rate=0.05), variant)
    assert np.mean(predict_many(m, d.X) == d.y) >= 0.99


@pytest.mark.parametrize("variant", VARIANTS)
def test_zero_epochs_keeps_initial_prototypes(rng, variant):
    d = _blobs(rng)
    m = train(d, TrainConfig(epochs=0, init_jitter=0.0), variant)
    assert np.allclose(m.W, [d.X[d.y == 1].mean(0), d.X[d.y == 2].mean(0)])
    assert len(m.training_log) == 1


@pytest.mark.parametrize("variant", ["glvq", "gmlvq", "lgmlvq"])
def test_cost_decreases(rng, backend, variant):
    X = np.vstack([rng.normal(0, 1.5, (80, 2)), rng.normal(1.5, 1.5, (80, 2))])
    d = Dataset(X, np.repeat([1, 2], 80))
    m = train(d, TrainConfig(epochs=20, learning_rate=0.01), variant)
    assert m.training_log[-1] <= m.training_log[0]
    assert m.training_log[-1] == pytest.approx(glvq_cost(m, d), rel=1e-9)


def test_rslvq_loglik_increases_and_prototypes_find_means(rng, backend):
    # with the model width equal to the blob width the means maximize the likelihood
    d = _blobs(rng, n=500, sep=2.0)
    m = train(d, TrainConfig(epochs=50, learning_rate=0.005, init_jitter=1.0), "rslvq")
    assert m.training_log[-1] >= m.training_log[0]
    assert m.training_log[-1] == pytest.approx(rslvq_loglik_total(m, d), rel=1e-9)
    for c in (1, 2):
        assert np.linalg.norm(m.W[c - 1] - d.X[d.y == c].mean(0)) < 0.5


def test_training_is_deterministic(rng):
    d = _blobs(rng)
    a = train(d, TrainConfig(epochs=5, seed=7), "gmlvq")
    b = train(d, TrainConfig(epochs=5, seed=7), "gmlvq")
    c = train(d, TrainConfig(epochs=5, seed=8), "gmlvq")
    assert np.array_equal(a.W, b.W) and np.array_equal(a.omegas, b.omegas)
    assert not np.array_equal(a.W, c.W)


@pytest.mark.parametrize("variant", ["gmlvq", "lgmlvq"])
def test_metric_trace_and_psd(rng, variant):
    X = rng.standard_normal((120, 3)) * [1.0, 3.0, 0.3]
    y = np.where(X[:, 2] > 0, 1, 2)
    m = train(Dataset(X, y), TrainConfig(epochs=10, learning_rate=0.05, learning_rate_metric=0.05), variant)
    for mm in m.metrics:
        assert mm.trace == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.eigvalsh(mm.lam).min() >= -1e-12


def test_metric_learning_finds_relevant_feature(rng):
    X = rng.standard_normal((300, 2))
    y = np.where(X[:, 1] > 0, 1, 2)
    m = train(Dataset(X, y), TrainConfig(epochs=30, learning_rate=0.05, learning_rate_metric=0.05), "gmlvq")
    lam = m.metrics[0].lam
    assert lam[1, 1] > 0.8


def test_divergence_is_reported(rng):
    d = _blobs(rng, sep=3.0)
    with pytest.raises(TrainingDivergenceError) as exc:
        train(d, TrainConfig(epochs=20, learning_rate=1e300), "glvq")
    assert exc.value.epoch >= 1


def test_single_class_rejected():
    from rejectlab.errors import DataError

    with pytest.raises(DataError):
        train(Dataset(np.zeros((4, 2)), [1, 1, 1, 1], ("a", "b")), TrainConfig(epochs=1), "glvq")


@pytest.mark.parametrize("kw", [dict(epochs=-1), dict(learning_rate=0), dict(sigma=-1), dict(prototypes_per_class=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TrainConfig(**kw)


# --- RSLVQ posterior ---------------------------------------------------------------------


def test_posterior_midpoint_is_even():
    m = _model("rslvq", sigma=1.0)
    assert posterior(m, [2, 0]) == pytest.approx([0.5, 0.5], abs=1e-12)


def test_posterior_on_a_prototype_far_from_the_other():
    m = _model("rslvq", W=((0, 0), (100, 0)), sigma=1.0)
    assert posterior(m, [0, 0])[0] > 1 - 1e-10


def test_posterior_matches_naive_formula(rng):
    W = rng.standard_normal((5, 2))
    labels = np.array([1, 2, 3, 1, 2])
    m = _model("rslvq", W, labels, sigma=0.7)
    for x in rng.standard_normal((50, 2)):
        g = np.exp(-np.sum((x - W) ** 2, axis=1) / (2 * 0.49))
        want = np.array([g[labels == c].sum() for c in (1, 2, 3)]) / g.sum()
        assert np.allclose(posterior(m, x), want, atol=1e-12)


def test_huge_sigma_gives_uniform_posterior(rng):
    m = _model("rslvq", W=((0, 0), (4, 0), (0, 4)), labels=(1, 2, 3), sigma=1e8)
    P = posterior_many(m, rng.standard_normal((10, 2)))
    assert np.allclose(P, 1 / 3, atol=1e-9)


def test_posterior_needs_rslvq():
    with pytest.raises(ModelStructureError):
        posterior(_model(), [0, 0])


# --- serialization ---------------------------------------------------------------------


@pytest.mark.parametrize("variant", VARIANTS)
def test_round_trip_is_exact(tmp_path, rng, variant):
    from rejectlab.data import standardize

    d, rec = standardize(_blobs(rng))
    m = train(d, TrainConfig(epochs=3, prototypes_per_class=2), variant)
    m = LvqModel(m.variant, m.W, m.labels, m.omegas, m.sigma, ("a", "b"), m.training_log, rec)
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert back.variant is m.variant and back.class_names == ("a", "b")
    assert np.array_equal(back.W, m.W) and np.array_equal(back.labels, m.labels)
    if m.omegas is not None:
        assert np.array_equal(back.omegas, m.omegas)
    assert back.sigma == m.sigma and back.training_log == m.training_log
    assert np.array_equal(back.standardizer.mean, rec.mean)
    X = rng.standard_normal((20, 2))
    assert np.array_equal(predict_many(back, X), predict_many(m, X))


def test_bad_format_rejected():
    doc = model_to_dict(_model())
    doc["version"] = 99
    with pytest.raises(ValueError, match="version"):
        model_from_dict(doc)
    with pytest.raises(ValueError):
        model_from_dict({"format": "other"})


def test_model_file_is_json(tmp_path):
    save_model(_model(), tmp_path / "m.json")
    assert json.loads((tmp_path / "m.json").read_text())["variant"] == "glvq"
