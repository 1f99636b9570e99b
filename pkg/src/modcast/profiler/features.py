"""Twelve-number summary of one channel, used to compare channels with each other.

The channel is z-normalized first, so every feature is unchanged by ``a * x + b``
with ``a > 0``. Level and spread therefore describe the first differences, and
count-like features are divided by the length to stay on a comparable scale.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import kurtosis, skew

from ..exceptions import InvalidInputError
from ..numerics import rfft
from .stl import acf

FEATURE_NAMES = (
    "diff_mean",
    "diff_std",
    "skewness",
    "kurtosis",
    "acf1",
    "acf2",
    "acf3",
    "acf_zero_frac",
    "trend_slope",
    "mean_cross_rate",
    "longest_above_frac",
    "spectral_centroid",
)


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for flag in mask:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def channel_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if x.ndim != 1 or n < 8:
        raise InvalidInputError("feature extraction needs a 1-D series of length >= 8")
    sd = x.std()
    if sd == 0:
        return np.zeros(len(FEATURE_NAMES))
    z = (x - x.mean()) / sd
    d = np.diff(z)
    r = acf(z, n - 1)
    crossing = np.nonzero(r[1:] <= 0)[0]
    zero_lag = (crossing[0] + 1) if crossing.size else n
    t = np.arange(n) / n
    slope = np.polyfit(t, z, 1)[0]
    above = z > 0
    power = np.abs(rfft(z).bins) ** 2
    freqs = np.arange(len(power)) / n
    centroid = float(freqs @ power / power.sum()) if power.sum() > 0 else 0.0
    return np.array(
        [
            d.mean(),
            d.std(),
            skew(z),
            kurtosis(z),
            r[1],
            r[2],
            r[3],
            zero_lag / n,
            slope,
            np.count_nonzero(above[1:] != above[:-1]) / (n - 1),
            _longest_run(above) / n,
            centroid,
        ]
    )
