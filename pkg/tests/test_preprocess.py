import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from modcast.exceptions import InvalidInputError
from modcast.numerics import Tensor, grad_check
from modcast.preprocess import (
    NormStats,
    instance_denormalize,
    instance_normalize,
    instance_normalize_tensor,
    moving_average_matrix,
    recompose,
    series_decompose,
    series_decompose_tensor,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_constant_channel_normalizes_to_zero():
    z, _ = instance_normalize(np.array([[5.0], [5.0], [5.0]]), 1e-5)
    np.testing.assert_array_equal(z, 0.0)


def test_population_variance():
    z, stats = instance_normalize(np.array([[1.0], [2.0], [3.0]]), 1e-300)
    np.testing.assert_allclose(z.ravel(), [-1.224745, 0, 1.224745], atol=1e-6)
    np.testing.assert_allclose(stats.variance, [[2.0 / 3.0]])


def test_denormalize_hand_cases():
    stats = NormStats(np.array([[3.0]]), np.array([[4.0]]), 0.0)
    np.testing.assert_array_equal(instance_denormalize(np.zeros((5, 1)), stats), 3.0)
    stats = NormStats(np.array([[0.0]]), np.array([[4.0]]), 0.0)
    np.testing.assert_array_equal(instance_denormalize(np.ones((5, 1)), stats), 2.0)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 30), st.integers(1, 4)), elements=finite))
def test_normalize_round_trip(x):
    z, stats = instance_normalize(x)
    np.testing.assert_allclose(instance_denormalize(z, stats), x, atol=1e-9, rtol=0)


def test_normalize_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        instance_normalize(np.ones(5))
    with pytest.raises(InvalidInputError):
        instance_normalize(np.ones((3, 1)), epsilon=0.0)


def test_denormalize_channel_mismatch():
    _, stats = instance_normalize(np.ones((4, 2)))
    with pytest.raises(InvalidInputError):
        instance_denormalize(np.ones((3, 3)), stats)


def test_decompose_constant_and_window_one():
    x = np.full((10, 2), 4.0)
    pair = series_decompose(x, 7)
    np.testing.assert_allclose(pair.trend, x)
    np.testing.assert_allclose(pair.season, 0.0)
    y = np.random.default_rng(0).standard_normal((10, 2))
    pair = series_decompose(y, 1)
    np.testing.assert_array_equal(pair.trend, y)
    np.testing.assert_array_equal(pair.season, 0.0)


def test_decompose_hand_case():
    x = np.array([1, 2, 3, 4, 5], dtype=float)[:, None]
    pair = series_decompose(x, 3)
    np.testing.assert_allclose(pair.trend.ravel(), [4 / 3, 2, 3, 4, 14 / 3], atol=1e-15)
    np.testing.assert_allclose(pair.season, x - pair.trend)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(2, 40), st.integers(1, 3)), elements=finite), st.integers(0, 12))
def test_decomposition_identity(x, k):
    window = min(2 * k + 1, 2 * x.shape[1] - 1)
    pair = series_decompose(x, window)
    assert np.max(np.abs(pair.trend + pair.season - x)) <= 1e-12 * max(1.0, np.max(np.abs(x)))


def test_decompose_window_validation():
    with pytest.raises(InvalidInputError):
        series_decompose(np.ones((5, 1)), 4)
    with pytest.raises(InvalidInputError):
        series_decompose(np.ones((5, 1)), 11)


def test_recompose():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    np.testing.assert_array_equal(recompose(np.zeros_like(b), b), b)
    np.testing.assert_array_equal(recompose(a, np.zeros_like(a)), a)
    np.testing.assert_array_equal(recompose(a, b), a + b)
    with pytest.raises(InvalidInputError):
        recompose(a, b[:, :2])


def test_tensor_versions_match_arrays():
    x = np.random.default_rng(2).standard_normal((3, 12, 2)) * 4 + 1
    z, stats = instance_normalize(x)
    zt, mean, scale = instance_normalize_tensor(Tensor(x))
    np.testing.assert_allclose(zt.data, z, atol=1e-12)
    np.testing.assert_allclose(scale.data, stats.scale, atol=1e-12)
    pair = series_decompose(x, 5)
    trend, season = series_decompose_tensor(Tensor(x), 5)
    np.testing.assert_allclose(trend.data, pair.trend, atol=1e-12)
    np.testing.assert_allclose(season.data, pair.season, atol=1e-12)
    assert moving_average_matrix(12, 5).sum(axis=1) == pytest.approx(np.ones(12))


def test_tensor_versions_are_differentiable():
    rng = np.random.default_rng(3)
    x = Tensor(rng.standard_normal((2, 7, 2)))
    w = rng.standard_normal((2, 7, 2))
    assert grad_check(lambda t: (instance_normalize_tensor(t)[0] * w).sum(), x) <= 1e-6
    assert grad_check(lambda t: (series_decompose_tensor(t, 5)[1] * w).sum(), x) <= 1e-6
