"""Instance normalization and moving-average decomposition with their inverses.

All functions treat the second-to-last axis as time and the last axis as
channels, so a single window ``[L, D]`` and a batch ``[B, L, D]`` are both
accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, NumericalError
from .numerics import Tensor, matmul, sqrt

DEFAULT_EPSILON = 1e-5
DEFAULT_WINDOW = 25


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray  # (..., 1, D)
    variance: np.ndarray  # (..., 1, D)
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.epsilon < 0:
            raise InvalidInputError("epsilon must be non-negative")
        if np.any(np.asarray(self.variance) < 0):
            raise InvalidInputError("variance must be non-negative")

    @property
    def scale(self) -> np.ndarray:
        return np.sqrt(self.variance + self.epsilon)


@dataclass(frozen=True)
class DecompositionPair:
    trend: np.ndarray
    season: np.ndarray
    window: int


def _as_array(x) -> np.ndarray:
    x = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise InvalidInputError(f"expected [..., L, D], got shape {x.shape}")
    return x


def instance_normalize(x, epsilon: float = DEFAULT_EPSILON) -> tuple[np.ndarray, NormStats]:
    x = _as_array(x)
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if x.shape[-2] < 1:
        raise InvalidInputError("lookback must contain at least one step")
    if not np.all(np.isfinite(x)):
        raise NumericalError("input contains non-finite values", stage="instance_normalize")
    mean = x.mean(axis=-2, keepdims=True)
    variance = ((x - mean) ** 2).mean(axis=-2, keepdims=True)
    stats = NormStats(mean, variance, epsilon)
    return (x - mean) / stats.scale, stats


def instance_denormalize(yhat, stats: NormStats):
    """``yhat * sqrt(var + eps) + mean`` channel-wise; works on arrays and tensors."""
    channels = yhat.shape[-1]
    if np.shape(stats.mean)[-1] != channels:
        raise InvalidInputError(f"channel mismatch: prediction has {channels}, stats have {np.shape(stats.mean)[-1]}")
    if isinstance(yhat, Tensor):
        return yhat * stats.scale + stats.mean
    return np.asarray(yhat, dtype=np.float64) * stats.scale + stats.mean


def moving_average_trend(x: np.ndarray, window: int) -> np.ndarray:
    """Centered average with the first/last step replicated ``(window - 1) / 2`` times."""
    half = (window - 1) // 2
    if half == 0:
        return x.copy()
    pad_width = [(0, 0)] * x.ndim
    pad_width[-2] = (half, half)
    padded = np.pad(x, pad_width, mode="edge")
    csum = np.cumsum(padded, axis=-2)
    zero = np.zeros_like(np.take(csum, [0], axis=-2))
    csum = np.concatenate([zero, csum], axis=-2)
    length = x.shape[-2]
    upper = np.take(csum, np.arange(window, window + length), axis=-2)
    lower = np.take(csum, np.arange(length), axis=-2)
    return (upper - lower) / window


def series_decompose(x, window: int = DEFAULT_WINDOW) -> DecompositionPair:
    x = _as_array(x)
    if window < 1 or window % 2 == 0:
        raise InvalidInputError(f"window must be an odd positive integer, got {window}")
    if window > 2 * x.shape[-2] - 1:
        raise InvalidInputError(f"window {window} exceeds 2L-1 = {2 * x.shape[-2] - 1}")
    trend = moving_average_trend(x, window)
    return DecompositionPair(trend=trend, season=x - trend, window=window)


def moving_average_matrix(length: int, window: int) -> np.ndarray:
    """``[L, L]`` matrix ``A`` with ``A @ x`` equal to :func:`moving_average_trend` of ``x``."""
    return moving_average_trend(np.eye(length), window)


# --- differentiable versions used inside the pipeline ------------------------------
def instance_normalize_tensor(x: Tensor, epsilon: float = DEFAULT_EPSILON) -> tuple[Tensor, Tensor, Tensor]:
    """:func:`instance_normalize` on a tensor; returns ``(z, mean, scale)`` with gradients through the statistics."""
    mean = x.mean(axis=-2, keepdims=True)
    centered = x - mean
    scale = sqrt((centered * centered).mean(axis=-2, keepdims=True) + epsilon)
    return centered / scale, mean, scale


def series_decompose_tensor(x: Tensor, window: int = DEFAULT_WINDOW) -> tuple[Tensor, Tensor]:
    """:func:`series_decompose` on a tensor; returns ``(trend, season)``."""
    trend = matmul(moving_average_matrix(x.shape[-2], window), x)
    return trend, x - trend


def recompose(trend_hat, season_hat):
    if tuple(trend_hat.shape) != tuple(season_hat.shape):
        raise InvalidInputError(f"shape mismatch {tuple(trend_hat.shape)} vs {tuple(season_hat.shape)}")
    return trend_hat + season_hat
