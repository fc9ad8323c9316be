import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rejectlab.core import (
    MetricMatrix,
    derive_seed,
    make_rng,
    normalize_trace,
    quadratic_form_distance,
    squared_euclidean,
)
from rejectlab.errors import DegenerateMetricError, DimensionMismatchError


@pytest.mark.parametrize(
    "a, b, expected",
    [((0, 0), (0, 0), 0.0), ((1, 0), (0, 0), 1.0), ((3, 4), (0, 0), 25.0)],
)
def test_squared_euclidean(a, b, expected):
    assert squared_euclidean(a, b) == expected


def test_squared_euclidean_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        squared_euclidean([1, 2], [1, 2, 3])


def test_quadratic_form_scaled_identity():
    n = 4
    e = np.zeros(n)
    e[2] = 1.0
    assert quadratic_form_distance(e, np.zeros(n), MetricMatrix.identity(n)) == pytest.approx(1 / n, abs=1e-15)


def test_quadratic_form_zero_displacement(rng):
    m = MetricMatrix(rng.standard_normal((3, 3)))
    a = rng.standard_normal(3)
    assert quadratic_form_distance(a, a, m) == 0.0


def test_quadratic_form_two_evaluation_orders(rng):
    for _ in range(20):
        n = int(rng.integers(1, 7))
        omega = rng.standard_normal((n, n))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        explicit = (a - b) @ omega.T @ omega @ (a - b)
        assert quadratic_form_distance(a, b, MetricMatrix(omega)) == pytest.approx(explicit, rel=1e-12)


def test_quadratic_form_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        quadratic_form_distance([1, 2, 3], [0, 0, 0], MetricMatrix.identity(2))


def test_normalize_trace_examples(rng):
    assert np.allclose(normalize_trace(MetricMatrix(2 * np.eye(2))).lam, np.eye(2) / 2)
    assert np.allclose(normalize_trace(MetricMatrix(np.eye(3))).lam, np.eye(3) / 3)
    m = normalize_trace(MetricMatrix(rng.standard_normal((5, 5))))
    assert np.trace(m.lam) == pytest.approx(1.0, abs=1e-12)


def test_normalize_trace_zero_matrix():
    with pytest.raises(DegenerateMetricError):
        normalize_trace(MetricMatrix(np.zeros((2, 2))))


def test_metric_matrix_rejects_bad_shapes():
    with pytest.raises(DimensionMismatchError):
        MetricMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        MetricMatrix([[np.nan, 0], [0, 1]])


def test_metric_matrix_is_immutable():
    m = MetricMatrix(np.eye(2))
    with pytest.raises(ValueError):
        m.omega[0, 0] = 5.0


def test_rng_streams_are_reproducible_and_distinct():
    a = make_rng(7, 1, 2).random(4)
    assert np.array_equal(a, make_rng(7, 1, 2).random(4))
    assert not np.array_equal(a, make_rng(7, 2, 1).random(4))
    assert derive_seed(7, 3) == derive_seed(7, 3) != derive_seed(7, 4)
    with pytest.raises(ValueError):
        make_rng(-1)


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@st.composite
def metric_and_pair(draw):
    n = draw(st.integers(1, 5))
    omega = draw(arrays(np.float64, (n, n), elements=finite))
    a = draw(arrays(np.float64, n, elements=finite))
    b = draw(arrays(np.float64, n, elements=finite))
    return MetricMatrix(omega), a, b


@settings(max_examples=200, deadline=None)
@given(metric_and_pair())
def test_quadratic_form_nonnegative_and_symmetric(case):
    m, a, b = case
    d = quadratic_form_distance(a, b, m)
    assert d >= 0.0
    assert d == quadratic_form_distance(b, a, m)


@settings(max_examples=200, deadline=None)
@given(metric_and_pair())
def test_identity_metric_matches_euclidean(case):
    _, a, b = case
    d = quadratic_form_distance(a, b, MetricMatrix(np.eye(a.size)))
    assert d == pytest.approx(squared_euclidean(a, b), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(metric_and_pair())
def test_normalize_trace_idempotent(case):
    m, _, _ = case
    if m.trace < 1e-6:
        return
    once = normalize_trace(m)
    twice = normalize_trace(once)
    assert np.allclose(once.omega, twice.omega, atol=1e-12, rtol=0)
    assert once.trace == pytest.approx(1.0, abs=1e-12)
