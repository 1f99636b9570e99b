"""Forecast error metrics and the two reference forecasters (persistence, Naive2)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import InvalidInputError

METRIC_NAMES = ("mse", "mae", "smape", "mase", "owa")


@dataclass(frozen=True)
class MetricReport:
    mse: float
    mae: float
    smape: float
    mase: float | None = None
    owa: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def get(self, name: str):
        return getattr(self, name)


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidInputError(f"expected [H] or [H, D], got shape {a.shape}")
    return a


def smape(pred, actual) -> float:
    """``200/H * sum |x - x̂| / (|x| + |x̂|)`` per channel, averaged over channels; 0/0 terms count 0."""
    pred, actual = _as_2d(pred), _as_2d(actual)
    num = np.abs(actual - pred)
    den = np.abs(actual) + np.abs(pred)
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float((200.0 * ratio.mean(axis=0)).mean())


def mase_scale(actual, season: int, history=None) -> np.ndarray:
    """Per-channel seasonal-difference scale.

    Without ``history`` the scale runs over the forecast window itself,
    ``1/(H-s) * sum_{j=s+1..H} |x_j - x_{j-s}|``; with ``history`` it is the
    usual in-sample seasonal naive error.
    """
    ref = _as_2d(actual if history is None else history)
    if ref.shape[0] <= season:
        raise InvalidInputError(f"need more than {season} steps to scale MASE, got {ref.shape[0]}")
    return np.abs(ref[season:] - ref[:-season]).mean(axis=0)


def mase(pred, actual, season: int = 1, history=None) -> float | None:
    pred, actual = _as_2d(pred), _as_2d(actual)
    scale = mase_scale(actual, season, history)
    if np.any(scale == 0):
        return None
    return float((np.abs(actual - pred).mean(axis=0) / scale).mean())


def compute_metrics(
    pred,
    actual,
    season: int = 1,
    naive2: tuple[float, float] | None = None,
    history=None,
    mase_scaling: str = "horizon",
) -> MetricReport:
    """MSE, MAE, SMAPE, MASE and (given Naive2 references) OWA for one forecast.

    ``mase_scaling="insample"`` switches MASE to the conventional in-sample
    scale computed from ``history``.
    """
    pred, actual = _as_2d(pred), _as_2d(actual)
    if pred.shape != actual.shape:
        raise InvalidInputError(f"shape mismatch {pred.shape} vs {actual.shape}")
    if pred.shape[0] < 1:
        raise InvalidInputError("horizon must be at least 1")
    err = actual - pred
    if mase_scaling == "horizon":
        m = mase(pred, actual, season) if pred.shape[0] > season else None
    elif mase_scaling == "insample":
        if history is None:
            raise InvalidInputError("insample MASE scaling needs history")
        m = mase(pred, actual, season, history)
    else:
        raise InvalidInputError(f"unknown mase_scaling {mase_scaling!r}")
    s = smape(pred, actual)
    owa = None
    if naive2 is not None and m is not None:
        owa = owa_score(s, m, *naive2)
    return MetricReport(float(np.mean(err**2)), float(np.mean(np.abs(err))), s, m, owa)


def owa_score(smape_value: float, mase_value: float, smape_naive2: float, mase_naive2: float) -> float | None:
    if smape_naive2 == 0 or mase_naive2 == 0:
        return None
    return 0.5 * (smape_value / smape_naive2 + mase_value / mase_naive2)


# --- reference forecasters ------------------------------------------------------------
def naive_persistence(history, horizon: int) -> np.ndarray:
    """Repeat the last observed value ``horizon`` times; works on ``[..., L, D]``."""
    history = np.asarray(history, dtype=np.float64)
    last = history[..., -1:, :]
    return np.repeat(last, horizon, axis=-2)


def _acf(x: np.ndarray, nlags: int) -> np.ndarray:
    x = x - x.mean()
    denom = np.dot(x, x)
    if denom == 0:
        return np.zeros(nlags + 1)
    return np.array([np.dot(x[: len(x) - k], x[k:]) / denom for k in range(nlags + 1)])


def is_seasonal(x, period: int) -> bool:
    """90% autocorrelation test at the seasonal lag used by the Naive2 convention."""
    x = np.asarray(x, dtype=np.float64)
    if period <= 1 or len(x) < 3 * period:
        return False
    acf = _acf(x, period)
    limit = 1.645 * np.sqrt((1.0 + 2.0 * np.sum(acf[1:period] ** 2)) / len(x))
    return bool(abs(acf[period]) > limit)


def seasonal_indices(x, period: int) -> np.ndarray:
    """Classical multiplicative decomposition indices (mean 1) for positions 0..period-1."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if period % 2:
        kernel = np.full(period, 1.0 / period)
    else:
        kernel = np.concatenate([[0.5], np.ones(period - 1), [0.5]]) / period
    ma = np.convolve(x, kernel, mode="valid")
    offset = (len(kernel) - 1) // 2
    ratios = x[offset : offset + len(ma)] / ma
    positions = (np.arange(len(ma)) + offset) % period
    idx = np.array([ratios[positions == k].mean() for k in range(period)])
    return idx / idx.mean()


def naive2_forecast(history, horizon: int, period: int = 1) -> np.ndarray:
    """Seasonally adjusted naive forecast for ``[L]`` or ``[L, D]`` history.

    Each channel is tested for seasonality; seasonal channels are divided by
    their multiplicative indices (additive when a channel has non-positive
    values), carried forward from the last adjusted level, then reseasonalized.
    """
    h = _as_2d(history)
    n, d = h.shape
    out = np.empty((horizon, d))
    for j in range(d):
        x = h[:, j]
        if is_seasonal(x, period):
            multiplicative = np.all(x > 0)
            if multiplicative:
                idx = seasonal_indices(x, period)
            else:
                idx = seasonal_indices(x - x.min() + 1.0, period)
            pos = np.arange(n) % period
            future = np.arange(n, n + horizon) % period
            if multiplicative:
                level = x[-1] / idx[pos[-1]]
                out[:, j] = level * idx[future]
            else:
                shift = x - x.min() + 1.0
                level = shift[-1] / idx[pos[-1]]
                out[:, j] = level * idx[future] + x.min() - 1.0
        else:
            out[:, j] = x[-1]
    return out if np.ndim(history) == 2 else out[:, 0]
