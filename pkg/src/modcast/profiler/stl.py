"""Seasonal-trend decomposition by loess (STL), following the original Fortran routine.

Positions are 1-based inside the smoothers, as in the reference code, so the
loess weights and local-linear corrections line up with it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError

SEASONAL_WINDOW = 7
INNER_ITERATIONS = 2
OUTER_ITERATIONS = 1


@dataclass(frozen=True)
class STLResult:
    seasonal: np.ndarray
    trend: np.ndarray
    remainder: np.ndarray
    period: int


def _odd_at_least(x: float) -> int:
    n = int(np.ceil(x))
    return n if n % 2 else n + 1


def default_windows(period: int, seasonal: int = SEASONAL_WINDOW) -> tuple[int, int]:
    """(trend window, low-pass window) for a given period and seasonal window."""
    trend = _odd_at_least(1.5 * period / (1.0 - 1.5 / seasonal))
    low_pass = _odd_at_least(period)
    return trend, low_pass


def _loess_points(y, xs, nleft, nright, length, degree, rw):
    """Local fits of ``y`` at positions ``xs`` over windows ``[nleft, nright]`` (1-based).

    Every row must span the same number of points. Returns (values, ok mask).
    """
    n = len(y)
    width = int(nright[0] - nleft[0] + 1)
    xs = np.asarray(xs, dtype=np.float64)
    j = nleft[:, None] + np.arange(width)[None, :]  # 1-based positions
    h = np.maximum(xs - nleft, nright - xs).astype(np.float64)
    if length > n:
        h = h + (length - n) // 2
    r = np.abs(j - xs[:, None])
    hh = h[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(r <= 0.001 * hh, 1.0, (1.0 - (r / hh) ** 3) ** 3)
    w = np.where(r <= 0.999 * hh, w, 0.0)
    if rw is not None:
        w = w * rw[j - 1]
    total = w.sum(axis=1)
    ok = total > 0
    w = np.divide(w, total[:, None], out=np.zeros_like(w), where=ok[:, None])
    if degree > 0:
        a = (w * j).sum(axis=1)
        c = (w * (j - a[:, None]) ** 2).sum(axis=1)
        fit = (h > 0) & (np.sqrt(c) > 0.001 * (n - 1))
        b = np.divide(xs - a, c, out=np.zeros_like(c), where=fit)
        w = np.where(fit[:, None], w * (b[:, None] * (j - a[:, None]) + 1.0), w)
    return (w * y[j - 1]).sum(axis=1), ok


def loess(y: np.ndarray, length: int, degree: int = 1, rw: np.ndarray | None = None) -> np.ndarray:
    """Loess smooth of ``y`` at every position with a ``length``-point tricube window."""
    n = len(y)
    pos = np.arange(1, n + 1)
    if length >= n:
        nleft = np.ones(n, dtype=np.int64)
        nright = np.full(n, n, dtype=np.int64)
    else:
        half = (length + 1) // 2
        nleft = np.clip(pos - half + 1, 1, n - length + 1).astype(np.int64)
        nright = nleft + length - 1
    out, ok = _loess_points(y, pos, nleft, nright, length, degree, rw)
    return np.where(ok, out, y)


def _cycle_subseries(y, period, ns, degree, rw):
    """Smooth each cycle-subseries and extend it one step at both ends (length n + 2p)."""
    n = len(y)
    out = np.zeros(n + 2 * period)
    for j in range(period):
        sub = y[j::period]
        k = len(sub)
        sub_rw = None if rw is None else rw[j::period]
        smooth = np.empty(k + 2)
        smooth[1:-1] = loess(sub, ns, degree, sub_rw)
        width = min(ns, k)
        ends, ok = _loess_points(
            sub,
            np.array([0.0, k + 1.0]),
            np.array([1, k - width + 1]),
            np.array([width, k]),
            ns,
            degree,
            sub_rw,
        )
        smooth[0] = ends[0] if ok[0] else smooth[1]
        smooth[-1] = ends[1] if ok[1] else smooth[-2]
        out[j :: period][: k + 2] = smooth
    return out


def _moving_average(x, window):
    c = np.cumsum(np.concatenate([[0.0], x]))
    return (c[window:] - c[:-window]) / window


def _robustness_weights(y, fit):
    r = np.abs(y - fit)
    n = len(r)
    part = np.sort(r)
    cmad = 3.0 * (part[n // 2] + part[(n - 1) // 2])
    if cmad == 0:
        return np.ones(n)
    u = r / cmad
    return np.where(u <= 0.001, 1.0, np.where(u <= 0.999, (1.0 - u**2) ** 2, 0.0))


def stl_decompose(
    x,
    period: int,
    seasonal: int = SEASONAL_WINDOW,
    trend: int | None = None,
    low_pass: int | None = None,
    inner: int = INNER_ITERATIONS,
    outer: int = OUTER_ITERATIONS,
    degree: int = 1,
) -> STLResult:
    """Additive seasonal + trend + remainder split of a 1-D series.

    Defaults: seasonal window 7, trend window the smallest odd integer
    ``>= 1.5 p / (1 - 1.5 / 7)``, low-pass window the smallest odd integer
    ``>= p``, two inner passes and one robustness pass.
    """
    y = np.asarray(x, dtype=np.float64)
    if y.ndim != 1:
        raise InvalidInputError(f"STL expects a 1-D series, got shape {y.shape}")
    if period < 2:
        raise InvalidInputError(f"period must be at least 2, got {period}")
    n = len(y)
    if n < 2 * period:
        raise InvalidInputError(f"series of length {n} is shorter than two periods ({2 * period})")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("series contains non-finite values")
    seasonal = max(3, seasonal + (1 - seasonal % 2))
    d_trend, d_low = default_windows(period, seasonal)
    trend = d_trend if trend is None else trend
    low_pass = d_low if low_pass is None else low_pass

    t = np.zeros(n)
    s = np.zeros(n)
    rw = None
    for it in range(outer + 1):
        for _ in range(inner):
            c = _cycle_subseries(y - t, period, seasonal, degree, rw)
            lp = _moving_average(_moving_average(_moving_average(c, period), period), 3)
            low = loess(lp, low_pass, degree)
            s = c[period : period + n] - low
            t = loess(y - s, trend, degree, rw)
        if it < outer:
            rw = _robustness_weights(y, s + t)
    return STLResult(s, t, y - s - t, period)


def acf(x: np.ndarray, nlags: int) -> np.ndarray:
    """Biased sample autocorrelation for lags ``0..nlags``."""
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    denom = np.dot(x, x)
    nlags = min(nlags, len(x) - 1)
    if denom == 0:
        return np.full(nlags + 1, np.nan)
    full = np.correlate(x, x, mode="full")[len(x) - 1 :]
    return full[: nlags + 1] / denom


def detect_period(x, max_lag: int | None = None) -> int:
    """Lag (>= 2) with the largest autocorrelation up to half the series length."""
    x = np.asarray(x, dtype=np.float64)
    max_lag = max_lag or len(x) // 2
    if max_lag < 2:
        raise InvalidInputError("series too short to detect a period")
    r = acf(x, max_lag)
    if np.isnan(r).any():
        raise InvalidInputError("constant series has no period")
    return int(np.argmax(r[2:]) + 2)
