"""Eight-descriptor characterization of a forecasting task, and its text export."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from ..exceptions import InvalidInputError, ModcastError
from .adf import stationarity_indicator
from .features import channel_features
from .properties import (
    DEFAULT_THRESHOLDS,
    correlation_value,
    seasonality_strength,
    shifting_value,
    transition_value,
    trend_strength,
)
from .stl import detect_period

PROPERTY_NAMES = ("trend", "seasonality", "stationarity", "shifting", "transition", "correlation")
PROFILE_FIELDS = PROPERTY_NAMES + ("n_feature", "hl_ratio")
ABSENT = "absent"


@dataclass(frozen=True)
class DataProfile:
    trend: float | None
    seasonality: float | None
    stationarity: int | None
    shifting: float | None
    transition: float | None
    correlation: float | None
    n_feature: int
    hl_ratio: float
    absences: dict = field(default_factory=dict, compare=False)  # property -> reason

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in PROFILE_FIELDS}

    def vector(self) -> np.ndarray:
        """Numeric view in :data:`PROFILE_FIELDS` order with NaN for absences."""
        return np.array([np.nan if v is None else float(v) for v in self.as_dict().values()])


def _channel_mean(values: list) -> float | None:
    got = [v for v in values if v is not None]
    return float(np.mean(got)) if got else None


def _majority(values: list) -> int | None:
    got = [v for v in values if v is not None]
    if not got:
        return None
    return int(np.mean(got) >= 0.5)


def profile_dataset(
    series,
    lookback: int,
    horizon: int,
    period: int | None = None,
    thresholds: int = DEFAULT_THRESHOLDS,
    extractor: Callable[[np.ndarray], np.ndarray] = channel_features,
) -> DataProfile:
    """Profile ``[T, D]`` (or ``[T]``) data for a task with the given lookback and horizon.

    Channel-wise properties are averaged over channels; stationarity is the
    majority vote (ties count as stationary). A property that cannot be
    computed for any channel is recorded as absent with its reason.
    """
    X = np.asarray(series, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidInputError(f"expected [T, D] data, got shape {X.shape}")
    if lookback < 1 or horizon < 1:
        raise InvalidInputError("lookback and horizon must be positive")
    d = X.shape[1]
    per = {name: [] for name in PROPERTY_NAMES[:5]}
    reasons: dict[str, str] = {}

    def attempt(name, fn, *args):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                per[name].append(fn(*args))
        except ModcastError as exc:
            per[name].append(None)
            reasons.setdefault(name, str(exc))

    for j in range(d):
        x = X[:, j]
        p = period
        if p is None:
            try:
                p = detect_period(x)
            except ModcastError as exc:
                reasons.setdefault("trend", str(exc))
                reasons.setdefault("seasonality", str(exc))
        if p is not None:
            attempt("trend", trend_strength, x, p)
            attempt("seasonality", seasonality_strength, x, p)
        attempt("stationarity", stationarity_indicator, x)
        attempt("shifting", shifting_value, x, thresholds)
        attempt("transition", transition_value, x)

    correlation = None
    if d < 2:
        reasons["correlation"] = "univariate data"
    else:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                correlation = correlation_value(X, extractor)
        except ModcastError as exc:
            reasons["correlation"] = str(exc)

    values = {
        "trend": _channel_mean(per["trend"]),
        "seasonality": _channel_mean(per["seasonality"]),
        "stationarity": _majority(per["stationarity"]),
        "shifting": _channel_mean(per["shifting"]),
        "transition": _channel_mean(per["transition"]),
        "correlation": correlation,
    }
    absences = {k: reasons.get(k, "undefined") for k, v in values.items() if v is None}
    return DataProfile(**values, n_feature=d, hl_ratio=horizon / lookback, absences=absences)


# --- flat key-value export -----------------------------------------------------------
def profile_to_text(profile: DataProfile, dataset: str = "", lookback: int | None = None, horizon: int | None = None) -> str:
    lines = []
    if dataset:
        lines.append(f"dataset={dataset}")
    if lookback is not None:
        lines.append(f"lookback={lookback}")
    if horizon is not None:
        lines.append(f"horizon={horizon}")
    for key, value in profile.as_dict().items():
        if value is None:
            text = ABSENT
        elif isinstance(value, (int, np.integer)):
            text = str(int(value))
        else:
            text = repr(float(value))
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def profile_from_text(text: str) -> DataProfile:
    raw = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInputError(f"malformed profile line {line!r}")
        raw[key.strip()] = value.strip()
    missing = [k for k in PROFILE_FIELDS if k not in raw]
    if missing:
        raise InvalidInputError(f"profile is missing {missing}")
    vals = {}
    for f in fields(DataProfile):
        if f.name not in PROFILE_FIELDS:
            continue
        v = raw[f.name]
        if v == ABSENT:
            vals[f.name] = None
        elif f.name in ("stationarity", "n_feature"):
            vals[f.name] = int(v)
        else:
            vals[f.name] = float(v)
    absences = {k: "absent in source" for k, v in vals.items() if v is None}
    return DataProfile(**vals, absences=absences)


__all__ = ["ABSENT", "DataProfile", "PROFILE_FIELDS", "PROPERTY_NAMES", "profile_dataset", "profile_from_text", "profile_to_text"]
