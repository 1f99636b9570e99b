"""The five embedding kinds and their output-shape algebra.

Input is always a batch ``[B, L, D]``.  Output layouts:

=========  ==================================================
kind       layout (batch, token axis, channel axis)
=========  ==================================================
none       ``[B, L, D]``
token      ``[B, L, H]``  circular-padded convolution over time
patch      ``[B*D, H, (L - P) // S + 2]``  per-channel strided patches
invert     ``[B, H, D]``  affine map of each channel's whole lookback
freq       ``[B, L // 2 + 1, D]``  complex rFFT bins, no parameters
=========  ==================================================
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .exceptions import InvalidConfigError, InvalidInputError, NumericalError
from .numerics import ComplexTensor, Tensor, affine, as_tensor, parameter, rfft_tensor, take

EMBED_KINDS = ("none", "token", "patch", "invert", "freq")


@dataclass(frozen=True)
class EmbedConfig:
    kind: str = "none"
    hidden: int = 64
    token_kernel: int = 3
    patch_len: int = 16
    stride: int = 8

    def __post_init__(self):
        if self.kind not in EMBED_KINDS:
            raise InvalidConfigError(f"unknown embedding kind {self.kind!r}; choose from {EMBED_KINDS}")
        if self.hidden < 1 or self.patch_len < 1 or self.stride < 1:
            raise InvalidConfigError("hidden, patch_len and stride must be positive")
        if self.token_kernel < 1 or self.token_kernel % 2 == 0:
            raise InvalidConfigError("token_kernel must be an odd positive integer")

    def fitted_to(self, lookback: int) -> "EmbedConfig":
        """Shrink patch length/stride so that a short lookback is still valid."""
        if self.patch_len <= lookback:
            return self
        patch = lookback
        return replace(self, patch_len=patch, stride=min(self.stride, max(1, patch // 2)))


@dataclass(frozen=True)
class Layout:
    batch: int
    tokens: int
    channels: int


@dataclass(frozen=True)
class EmbeddedBatch:
    data: Tensor | ComplexTensor
    layout: Layout
    kind: str
    folded: bool = False  # True when channels were folded into the batch axis

    @property
    def is_complex(self) -> bool:
        return isinstance(self.data, ComplexTensor)


def patch_count(lookback: int, patch_len: int, stride: int) -> int:
    return (lookback - patch_len) // stride + 2


def output_layout(cfg: EmbedConfig, batch: int, lookback: int, channels: int) -> Layout:
    """Layout produced by :func:`embed`, evaluated from the shape rules alone."""
    if cfg.kind == "none":
        return Layout(batch, lookback, channels)
    if cfg.kind == "token":
        return Layout(batch, lookback, cfg.hidden)
    if cfg.kind == "patch":
        return Layout(batch * channels, cfg.hidden, patch_count(lookback, cfg.patch_len, cfg.stride))
    if cfg.kind == "invert":
        return Layout(batch, cfg.hidden, channels)
    return Layout(batch, lookback // 2 + 1, channels)


def embed_param_count(cfg: EmbedConfig, lookback: int, channels: int) -> int:
    h = cfg.hidden
    if cfg.kind == "token":
        return cfg.token_kernel * channels * h + h
    if cfg.kind == "patch":
        return cfg.patch_len * h + h
    if cfg.kind == "invert":
        return lookback * h + h
    return 0


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_embed(cfg: EmbedConfig, lookback: int, channels: int, rng: np.random.Generator) -> dict[str, Tensor]:
    h = cfg.hidden
    if cfg.kind == "token":
        fan_in = cfg.token_kernel * channels
    elif cfg.kind == "patch":
        fan_in = cfg.patch_len
    elif cfg.kind == "invert":
        fan_in = lookback
    else:
        return {}
    return {
        "weight": parameter(_uniform(rng, fan_in, (fan_in, h))),
        "bias": parameter(_uniform(rng, fan_in, (h,))),
    }


def embed(x, cfg: EmbedConfig, params: Mapping[str, Tensor] | None = None) -> EmbeddedBatch:
    x = as_tensor(x)
    if x.ndim != 3:
        raise InvalidInputError(f"embed expects [B, L, D], got {x.shape}")
    if not np.all(np.isfinite(x.data)):
        raise NumericalError("non-finite input", stage="embed")
    b, length, d = x.shape
    params = params or {}
    layout = output_layout(cfg, b, length, d) if cfg.kind != "patch" or cfg.patch_len <= length else None

    if cfg.kind == "none":
        return EmbeddedBatch(x, layout, cfg.kind)

    if cfg.kind == "token":
        k = cfg.token_kernel
        half = k // 2
        # window[l, j] covers time (l + j - half) mod L
        idx = (np.arange(length)[:, None] + np.arange(k)[None, :] - half) % length
        windows = take(x, idx, axis=1).reshape(b, length, k * d)
        return EmbeddedBatch(affine(windows, params["weight"], params["bias"]), layout, cfg.kind)

    if cfg.kind == "patch":
        p, s = cfg.patch_len, cfg.stride
        if p > length:
            raise InvalidInputError(f"patch_len {p} exceeds lookback {length}")
        n_patch = patch_count(length, p, s)
        series = x.transpose(0, 2, 1).reshape(b * d, length)
        # end padding replicates the last step `stride` times
        idx = np.minimum(np.arange(n_patch)[:, None] * s + np.arange(p)[None, :], length - 1)
        patches = take(series, idx, axis=1)  # [B*D, N, P]
        out = affine(patches, params["weight"], params["bias"]).transpose(0, 2, 1)
        return EmbeddedBatch(out, output_layout(cfg, b, length, d), cfg.kind, folded=True)

    if cfg.kind == "invert":
        out = affine(x.transpose(0, 2, 1), params["weight"], params["bias"]).transpose(0, 2, 1)
        return EmbeddedBatch(out, layout, cfg.kind)

    if length < 2:
        raise InvalidInputError("frequency embedding needs a lookback of at least 2")
    re, im = rfft_tensor(x.transpose(0, 2, 1))
    return EmbeddedBatch(ComplexTensor(re, im).transpose(0, 2, 1), layout, cfg.kind)
