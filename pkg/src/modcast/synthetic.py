"""Seeded synthetic series for tests and demos."""

from __future__ import annotations

import numpy as np


def sinusoid_trend(
    length: int = 2000,
    channels: int = 3,
    period: int = 24,
    slope: float = 0.002,
    noise: float = 0.1,
    seed: int = 0,
) -> np.ndarray:
    """``[T, D]`` sinusoids with per-channel phase, amplitude and linear trend plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(length)[:, None]
    phase = rng.uniform(0, 2 * np.pi, channels)
    amp = rng.uniform(0.5, 2.0, channels)
    slopes = slope * (1 + np.arange(channels))
    return amp * np.sin(2 * np.pi * t / period + phase) + slopes * t + noise * rng.standard_normal((length, channels))


def random_walk(length: int, seed: int = 0) -> np.ndarray:
    return np.cumsum(np.random.default_rng(seed).standard_normal(length))


def linear_series(length: int, channels: int = 1, seed: int = 0) -> np.ndarray:
    """Exactly linear channels with random slopes and offsets."""
    rng = np.random.default_rng(seed)
    t = np.arange(length)[:, None] / length
    return rng.uniform(-1, 1, channels) * t + rng.uniform(-1, 1, channels)
