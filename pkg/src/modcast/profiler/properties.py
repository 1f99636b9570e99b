"""The six data properties: trend, seasonality, stationarity, shifting, transition, correlation."""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np

from ..exceptions import DegenerateSeriesWarning, InvalidInputError, UndefinedPropertyError
from .adf import stationarity_indicator
from .features import channel_features
from .stl import acf, stl_decompose

DEFAULT_THRESHOLDS = 100


def _strength(component: np.ndarray, remainder: np.ndarray, what: str) -> float:
    denom = np.var(component + remainder)
    if denom == 0:
        warnings.warn(f"{what} strength of a degenerate series set to 0", DegenerateSeriesWarning, stacklevel=3)
        return 0.0
    return float(np.clip(1.0 - np.var(remainder) / denom, 0.0, 1.0))


def _is_constant(x: np.ndarray) -> bool:
    return bool(np.ptp(x) == 0)


def trend_strength(x, period: int) -> float:
    """``max(0, 1 - var(R) / var(T + R))`` on the STL split."""
    x = np.asarray(x, dtype=np.float64)
    if _is_constant(x):
        warnings.warn("constant series: trend strength set to 0", DegenerateSeriesWarning, stacklevel=2)
        return 0.0
    r = stl_decompose(x, period)
    return _strength(r.trend, r.remainder, "trend")


def seasonality_strength(x, period: int) -> float:
    """``max(0, 1 - var(R) / var(S + R))`` on the STL split."""
    x = np.asarray(x, dtype=np.float64)
    if _is_constant(x):
        warnings.warn("constant series: seasonality strength set to 0", DegenerateSeriesWarning, stacklevel=2)
        return 0.0
    r = stl_decompose(x, period)
    return _strength(r.seasonal, r.remainder, "seasonality")


def _znorm(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    if sd == 0:
        raise InvalidInputError("constant series")
    return (x - x.mean()) / sd


def shifting_value(x, m: int = DEFAULT_THRESHOLDS) -> float:
    """Median over ``m`` rising thresholds of the (position-scaled) median exceedance index.

    Exceedance medians are divided by the index range ``T - 1`` so the value
    says where in time the high values sit: near 1 late, near 0 early.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) < 2:
        raise InvalidInputError("shifting needs a 1-D series of length >= 2")
    if m < 1:
        raise InvalidInputError("m must be positive")
    z = _znorm(x)
    lo, hi = z.min(), z.max()
    thresholds = lo + np.arange(m) * (hi - lo) / m
    idx = np.arange(len(z))
    medians = []
    for s in thresholds:
        hits = idx[z > s]
        if hits.size == 0:
            warnings.warn("empty exceedance set skipped", DegenerateSeriesWarning, stacklevel=2)
            continue
        medians.append(np.median(hits))
    return float(np.median(np.asarray(medians) / (len(z) - 1)))


def first_zero_crossing(x) -> int:
    """Smallest lag whose autocorrelation is <= 0."""
    x = np.asarray(x, dtype=np.float64)
    r = acf(x, len(x) - 1)
    if np.isnan(r).any():
        raise InvalidInputError("constant series")
    below = np.nonzero(r[1:] <= 0)[0]
    if below.size == 0:
        raise UndefinedPropertyError("autocorrelation never crosses zero")
    return int(below[0] + 1)


def tercile_symbols(y) -> np.ndarray:
    """Rank of each element mapped to ``floor(3 rank / n)`` in {0, 1, 2}; ties keep order."""
    y = np.asarray(y, dtype=np.float64)
    ranks = np.empty(len(y), dtype=np.int64)
    ranks[np.argsort(y, kind="stable")] = np.arange(len(y))
    return (3 * ranks) // len(y)


def transition_matrix(symbols) -> np.ndarray:
    """Counts of consecutive symbol pairs divided by the sequence length."""
    symbols = np.asarray(symbols)
    m = np.zeros((3, 3))
    np.add.at(m, (symbols[:-1], symbols[1:]), 1.0)
    return m / len(symbols)


def transition_value(x) -> float:
    """Trace of the column covariance of the tercile transition matrix, sampled every ``tau`` steps."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) < 3:
        raise InvalidInputError("transition needs a 1-D series of length >= 3")
    if _is_constant(x):
        raise InvalidInputError("constant series")
    tau = first_zero_crossing(x)
    y = x[::tau]
    if len(y) < 2:
        raise UndefinedPropertyError(f"downsampling by {tau} leaves fewer than two points")
    mat = transition_matrix(tercile_symbols(y))
    return float(np.trace(np.cov(mat, rowvar=False)))


def correlation_value(X, extractor: Callable[[np.ndarray], np.ndarray] = channel_features) -> float:
    """``mean(P) + 1 / (1 + var(P))`` over pairwise Pearson correlations of channel features."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError("correlation expects [T, D]")
    if X.shape[1] < 2:
        raise UndefinedPropertyError("correlation needs at least two channels")
    feats = np.stack([np.asarray(extractor(X[:, j]), dtype=np.float64) for j in range(X.shape[1])])
    pairs = []
    for i in range(len(feats)):
        for j in range(i + 1, len(feats)):
            a, b = feats[i], feats[j]
            if a.std() == 0 or b.std() == 0:
                warnings.warn(f"zero-variance features for pair ({i}, {j}) skipped", DegenerateSeriesWarning, stacklevel=2)
                continue
            pairs.append(float(np.corrcoef(a, b)[0, 1]))
    if not pairs:
        raise UndefinedPropertyError("no channel pair with usable features")
    p = np.asarray(pairs)
    return float(p.mean() + 1.0 / (1.0 + p.var()))


__all__ = [
    "DEFAULT_THRESHOLDS",
    "correlation_value",
    "first_zero_crossing",
    "seasonality_strength",
    "shifting_value",
    "stationarity_indicator",
    "tercile_symbols",
    "transition_matrix",
    "transition_value",
    "trend_strength",
]
