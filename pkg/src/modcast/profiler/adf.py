"""Augmented Dickey-Fuller unit-root test with a constant term."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError

MIN_LENGTH = 30

# 5% critical values of the t statistic with a constant term, by sample size
# (Fuller 1976); the last entry is the asymptotic value.
_CRIT_N = np.array([25.0, 50.0, 100.0, 250.0, 500.0, np.inf])
_CRIT_5 = np.array([-3.00, -2.93, -2.89, -2.88, -2.87, -2.86])


@dataclass(frozen=True)
class ADFResult:
    statistic: float
    critical_value: float
    lags: int
    nobs: int

    @property
    def stationary(self) -> bool:
        return self.statistic <= self.critical_value


def schwert_lags(n: int) -> int:
    return int(np.floor(12.0 * (n / 100.0) ** 0.25))


def critical_value_5pct(nobs: int) -> float:
    """Table value interpolated linearly in ``1/n`` (clamped below the smallest size)."""
    inv = 1.0 / np.maximum(_CRIT_N, 1.0)
    inv[-1] = 0.0
    x = min(1.0 / max(nobs, 1), inv[0])
    # np.interp needs increasing abscissae
    return float(np.interp(x, inv[::-1], _CRIT_5[::-1]))


def _ols(X: np.ndarray, target: np.ndarray):
    beta, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ beta
    return beta, float(resid @ resid)


def _design(y: np.ndarray, dy: np.ndarray, k: int, start: int):
    rows = np.arange(start, len(dy))
    cols = [np.ones(len(rows)), y[rows]] + [dy[rows - i] for i in range(1, k + 1)]
    return np.column_stack(cols), dy[rows]


def _aic(ssr: float, nobs: int, ncols: int) -> float:
    llf = -0.5 * nobs * (np.log(2.0 * np.pi) + np.log(ssr / nobs) + 1.0)
    return -2.0 * llf + 2.0 * ncols


def adf_test(x, lags: int | None = None, autolag: bool = True) -> ADFResult:
    """Regress ``dy_t`` on ``[1, y_{t-1}, dy_{t-1..t-k}]`` and return the t statistic of ``y_{t-1}``.

    ``k_max`` is ``lags`` or ``floor(12 (T/100)^(1/4))``. With ``autolag`` the lag
    order minimizing AIC over ``0..k_max`` (all fitted on a common sample) is
    refitted on every usable observation; otherwise ``k_max`` is used directly.
    """
    y = np.asarray(x, dtype=np.float64)
    if y.ndim != 1:
        raise InvalidInputError("ADF expects a 1-D series")
    n = len(y)
    if n < MIN_LENGTH:
        raise InvalidInputError(f"ADF needs at least {MIN_LENGTH} observations, got {n}")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("series contains non-finite values")
    if np.var(y) == 0:
        raise InvalidInputError("zero-variance series")
    k_max = schwert_lags(n) if lags is None else int(lags)
    dy = np.diff(y)
    if len(dy) - k_max < k_max + 3:
        raise InvalidInputError(f"{n} observations cannot support {k_max} lags")
    k = k_max
    if autolag:
        scores = []
        for lag in range(k_max + 1):
            X, target = _design(y, dy, lag, k_max)
            _, ssr = _ols(X, target)
            scores.append(_aic(ssr, len(target), X.shape[1]))
        k = int(np.argmin(scores))
    X, target = _design(y, dy, k, k)
    beta, ssr = _ols(X, target)
    nobs = len(target)
    sigma2 = ssr / (nobs - X.shape[1])
    se = np.sqrt(sigma2 * np.linalg.pinv(X.T @ X)[1, 1])
    if se > 0:
        stat = float(beta[1] / se)
    else:
        stat = float("-inf") if beta[1] < 0 else float("inf")
    return ADFResult(stat, critical_value_5pct(nobs), k, nobs)


def stationarity_indicator(x) -> int:
    """1 when the unit root is rejected at the 5% level, else 0."""
    return int(adf_test(x).stationary)
