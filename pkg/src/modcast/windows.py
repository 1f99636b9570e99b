"""Chronological splits and sliding (lookback, horizon) windows."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import InvalidInputError

DEFAULT_RATIOS = (0.7, 0.1, 0.2)


@dataclass(frozen=True)
class WindowedDataset:
    X: np.ndarray  # [N, L, D]
    Y: np.ndarray  # [N, H, D]
    split: str
    source_name: str = ""
    frequency: int | None = None
    target_start: np.ndarray | None = None  # absolute index of each window's first target step

    def __len__(self) -> int:
        return len(self.X)

    def __iter__(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        return zip(self.X, self.Y)

    @property
    def lookback(self) -> int:
        return self.X.shape[1]

    @property
    def horizon(self) -> int:
        return self.Y.shape[1]

    @property
    def channels(self) -> int:
        return self.X.shape[2]


def sliding_windows(series: np.ndarray, lookback: int, horizon: int, first_target: int, last_target_end: int):
    """Windows whose targets start in ``[first_target, last_target_end - horizon]``."""
    starts = np.arange(first_target, last_target_end - horizon + 1)
    if starts.size == 0:
        d = series.shape[1]
        return np.zeros((0, lookback, d)), np.zeros((0, horizon, d)), starts
    x_idx = starts[:, None] - lookback + np.arange(lookback)[None, :]
    y_idx = starts[:, None] + np.arange(horizon)[None, :]
    return series[x_idx], series[y_idx], starts


def split_bounds(length: int, ratios=DEFAULT_RATIOS) -> tuple[int, int]:
    """End indices of the train and validation segments."""
    r_train, r_val, r_test = ratios
    if min(ratios) < 0 or abs(r_train + r_val + r_test - 1.0) > 1e-9:
        raise InvalidInputError(f"ratios must be non-negative and sum to 1, got {ratios}")
    n_train = int(length * r_train)
    n_test = int(length * r_test)
    n_val = length - n_train - n_test
    return n_train, n_train + n_val


def split_and_window(
    series,
    lookback: int,
    horizon: int,
    ratios=DEFAULT_RATIOS,
    source_name: str = "",
    frequency: int | None = None,
) -> tuple[WindowedDataset, WindowedDataset, WindowedDataset]:
    """Train/val/test windows; later segments reach back ``lookback`` steps for context."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim == 1:
        series = series[:, None]
    length = series.shape[0]
    if lookback < 1 or horizon < 1:
        raise InvalidInputError("lookback and horizon must be positive")
    if length < lookback + horizon:
        raise InvalidInputError(f"series of length {length} is shorter than lookback + horizon = {lookback + horizon}")
    train_end, val_end = split_bounds(length, ratios)
    if train_end < lookback + horizon:
        raise InvalidInputError(f"training segment ({train_end} steps) cannot hold one window of {lookback + horizon}")
    segments = (("train", lookback, train_end), ("val", max(train_end, lookback), val_end), ("test", max(val_end, lookback), length))
    out = []
    for split, first, end in segments:
        X, Y, starts = sliding_windows(series, lookback, horizon, first, end)
        out.append(WindowedDataset(X, Y, split, source_name, frequency, starts))
    return tuple(out)
