"""MLP, gated RNN and Transformer blocks under the temporal/feature fusion contract.

After :func:`arrange_for_fusion` every block sees a tensor ``[B', S, F]``:

* MLP mixes the last axis (``F``); temporal fusion puts the token axis there,
  feature fusion the channel axis.
* RNN and Transformer run along the middle axis (``S``) with ``F`` input
  features; temporal fusion makes tokens the sequence, feature fusion makes
  channels the sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .embed import EmbeddedBatch
from .exceptions import InvalidCombinationError, InvalidConfigError, InvalidInputError, NumericalError
from .numerics import (
    ComplexTensor,
    Tensor,
    activation,
    affine,
    complex_affine,
    layer_norm,
    parameter,
    sigmoid,
    softmax,
    stack,
    tanh,
)

ARCHS = ("mlp", "rnn", "transformer")
FUSIONS = ("temporal", "feature")


@dataclass(frozen=True)
class FFConfig:
    arch: str = "mlp"
    layers: int = 2
    width: int = 64
    heads: int = 4
    activation: str = "relu"
    ff_mult: int = 4
    dropout: float = 0.0

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise InvalidConfigError(f"unknown architecture {self.arch!r}; choose from {ARCHS}")
        # an MLP with zero layers is the identity block (pure linear pipeline)
        min_layers = 0 if self.arch == "mlp" else 1
        if self.layers < min_layers:
            raise InvalidConfigError(f"{self.arch} needs at least {min_layers} layer(s)")
        if self.width < 1 or self.heads < 1 or self.ff_mult < 1:
            raise InvalidConfigError("width, heads and ff_mult must be positive")
        if self.arch == "transformer" and self.width % self.heads:
            raise InvalidConfigError(f"heads ({self.heads}) must divide width ({self.width})")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidConfigError("dropout must lie in [0, 1)")
        activation(self.activation)


@dataclass(frozen=True)
class ArrangedBatch:
    data: Tensor | ComplexTensor
    fusion: str
    arch: str
    source: EmbeddedBatch

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def mixing_axis(self) -> int:
        """Axis an MLP mixes (last) or a sequence model scans (middle)."""
        return -1 if self.arch == "mlp" else 1


def _transposes(fusion: str, arch: str) -> bool:
    # MLP temporal -> [B, D, L]; sequence models feature -> [B, D, L]
    return (fusion == "temporal") == (arch == "mlp")


def arrange_for_fusion(e, fusion: str, arch: str) -> ArrangedBatch:
    if fusion not in FUSIONS:
        raise InvalidConfigError(f"unknown fusion {fusion!r}; choose from {FUSIONS}")
    if arch not in ARCHS:
        raise InvalidConfigError(f"unknown architecture {arch!r}")
    if isinstance(e, ArrangedBatch):
        if e.fusion == fusion and e.arch == arch:
            return e
        e = e.source
    if e.is_complex and arch != "mlp":
        raise InvalidCombinationError("frequency embedding requires MLP")
    data = e.data.transpose(0, 2, 1) if _transposes(fusion, arch) else e.data
    return ArrangedBatch(data, fusion, arch, e)


# --- parameter initialisation ------------------------------------------------------
def _uniform(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return parameter(rng.uniform(-bound, bound, size=shape))


def _linear(rng, n_in, n_out) -> dict[str, Tensor]:
    return {"weight": _uniform(rng, n_in, (n_in, n_out)), "bias": _uniform(rng, n_in, (n_out,))}


def mlp_dims(features: int, cfg: FFConfig) -> list[int]:
    if cfg.layers == 0:
        return [features]
    return [features] + [cfg.width] * (cfg.layers - 1) + [features]


def init_block(cfg: FFConfig, features: int, rng: np.random.Generator) -> dict:
    """Parameters for a block whose input has ``features`` entries on its last axis."""
    if cfg.arch == "mlp":
        dims = mlp_dims(features, cfg)
        return {f"layer{i}": _linear(rng, dims[i], dims[i + 1]) for i in range(len(dims) - 1)}
    if cfg.arch == "rnn":
        out, n_in = {}, features
        w = cfg.width
        for i in range(cfg.layers):
            out[f"layer{i}"] = {
                "w_in": _uniform(rng, w, (n_in, 3 * w)),
                "w_hid": _uniform(rng, w, (w, 3 * w)),
                "b_in": _uniform(rng, w, (3 * w,)),
                "b_hid": _uniform(rng, w, (3 * w,)),
            }
            n_in = w
        return out
    w, hidden = cfg.width, cfg.width * cfg.ff_mult
    out = {"input": _linear(rng, features, w)}
    for i in range(cfg.layers):
        out[f"layer{i}"] = {
            "norm1": {"gain": parameter(np.ones(w)), "bias": parameter(np.zeros(w))},
            "query": _linear(rng, w, w),
            # no key bias: it shifts every score of a query row equally, which softmax ignores
            "key": {"weight": _uniform(rng, w, (w, w))},
            "value": _linear(rng, w, w),
            "out": _linear(rng, w, w),
            "norm2": {"gain": parameter(np.ones(w)), "bias": parameter(np.zeros(w))},
            "ff1": _linear(rng, w, hidden),
            "ff2": _linear(rng, hidden, w),
        }
    out["final_norm"] = {"gain": parameter(np.ones(w)), "bias": parameter(np.zeros(w))}
    return out


def block_output_features(cfg: FFConfig, features: int) -> int:
    return features if cfg.arch == "mlp" else cfg.width


# --- forward passes ------------------------------------------------------------------
def _check(t: Tensor, layer: str) -> Tensor:
    if not np.all(np.isfinite(t.data)):
        raise NumericalError("non-finite activations", stage=layer)
    return t


def _dropout(x: Tensor, rate: float, rng) -> Tensor:
    if rate <= 0.0 or rng is None:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask


def mlp_forward(x: Tensor, cfg: FFConfig, params: Mapping, rng=None) -> Tensor:
    act = activation(cfg.activation)
    n = len(params)
    for i in range(n):
        p = params[f"layer{i}"]
        x = affine(x, p["weight"], p["bias"])
        if i < n - 1:
            x = _dropout(act(x), cfg.dropout, rng)
        _check(x, f"mlp layer {i}")
    return x


def gru_forward(x: Tensor, cfg: FFConfig, params: Mapping) -> Tensor:
    """Gated recurrent scan over axis 1; returns every hidden state ``[B', S, width]``."""
    w = cfg.width
    batch, steps = x.shape[0], x.shape[1]
    for i in range(cfg.layers):
        p = params[f"layer{i}"]
        projected = affine(x, p["w_in"], p["b_in"])  # [B', S, 3w]
        h = Tensor(np.zeros((batch, w)))
        states = []
        for t in range(steps):
            xt = projected[:, t, :]
            ht = affine(h, p["w_hid"], p["b_hid"])
            reset = sigmoid(xt[:, :w] + ht[:, :w])
            update = sigmoid(xt[:, w : 2 * w] + ht[:, w : 2 * w])
            cand = tanh(xt[:, 2 * w :] + reset * ht[:, 2 * w :])
            h = (1.0 - update) * cand + update * h
            states.append(h)
        x = _check(stack(states, axis=1), f"rnn layer {i}")
    return x


def attention(x: Tensor, p: Mapping, heads: int, return_weights: bool = False):
    """Multi-head self-attention over axis 1 of ``[B', S, width]``."""
    batch, steps, w = x.shape
    dh = w // heads

    def split(t):
        return t.reshape(batch, steps, heads, dh).transpose(0, 2, 1, 3)

    q = split(affine(x, p["query"]["weight"], p["query"]["bias"]))
    k = split(affine(x, p["key"]["weight"]))
    v = split(affine(x, p["value"]["weight"], p["value"]["bias"]))
    scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(dh))
    weights = softmax(scores, axis=-1)
    mixed = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, steps, w)
    out = affine(mixed, p["out"]["weight"], p["out"]["bias"])
    return (out, weights) if return_weights else out


def transformer_forward(x: Tensor, cfg: FFConfig, params: Mapping, rng=None) -> Tensor:
    act = activation(cfg.activation)
    x = affine(x, params["input"]["weight"], params["input"]["bias"])
    for i in range(cfg.layers):
        p = params[f"layer{i}"]
        h = layer_norm(x, p["norm1"]["gain"], p["norm1"]["bias"])
        x = x + _dropout(attention(h, p, cfg.heads), cfg.dropout, rng)
        h = layer_norm(x, p["norm2"]["gain"], p["norm2"]["bias"])
        h = act(affine(h, p["ff1"]["weight"], p["ff1"]["bias"]))
        x = x + _dropout(affine(h, p["ff2"]["weight"], p["ff2"]["bias"]), cfg.dropout, rng)
        _check(x, f"transformer layer {i}")
    return layer_norm(x, params["final_norm"]["gain"], params["final_norm"]["bias"])


def forward_block(x, cfg: FFConfig, params: Mapping, rng=None) -> Tensor:
    """Apply the configured block; ``rng`` enables dropout (training only)."""
    data = x.data if isinstance(x, ArrangedBatch) else x
    if isinstance(data, ComplexTensor):
        raise InvalidInputError("complex input must go through forward_complex_mlp")
    if not np.all(np.isfinite(data.data)):
        raise NumericalError("non-finite block input", stage="forward_block")
    if cfg.arch == "mlp":
        return mlp_forward(data, cfg, params, rng)
    if cfg.arch == "rnn":
        return gru_forward(data, cfg, params)
    return transformer_forward(data, cfg, params, rng)


# --- complex path -------------------------------------------------------------------
def init_complex_linear(rng: np.random.Generator, n_in: int, n_out: int) -> dict[str, Tensor]:
    bound = 1.0 / np.sqrt(n_in)
    return {
        "w_re": parameter(rng.uniform(-bound, bound, (n_in, n_out))),
        "w_im": parameter(rng.uniform(-bound, bound, (n_in, n_out))),
        "b_re": parameter(rng.uniform(-bound, bound, (n_out,))),
        "b_im": parameter(rng.uniform(-bound, bound, (n_out,))),
    }


def forward_complex_mlp(s, params: Mapping, in_bins: int, out_bins: int):
    """One complex affine map from ``in_bins`` to ``out_bins`` along the last axis.

    Accepts a :class:`ComplexTensor` or any complex array (e.g. the bins of a
    :class:`~modcast.numerics.ComplexSpectrum`); returns the same kind.
    """
    as_array = not isinstance(s, ComplexTensor)
    z = ComplexTensor.from_array(getattr(s, "bins", s)) if as_array else s
    if z.shape[-1] != in_bins:
        raise InvalidInputError(f"expected {in_bins} bins, got {z.shape[-1]}")
    if params["w_re"].shape != (in_bins, out_bins):
        raise InvalidInputError(f"weights are {params['w_re'].shape}, expected {(in_bins, out_bins)}")
    out = complex_affine(z, params["w_re"], params["w_im"], params.get("b_re"), params.get("b_im"))
    return out.numpy() if as_array else out


def init_complex_block(cfg: FFConfig, features: int, rng: np.random.Generator) -> dict:
    return {f"layer{i}": init_complex_linear(rng, features, features) for i in range(cfg.layers)}


def complex_block_forward(z: ComplexTensor, cfg: FFConfig, params: Mapping) -> ComplexTensor:
    """Stack of dimension-preserving complex affine maps with split activations between them."""
    act = activation(cfg.activation)
    n = len(params)
    for i in range(n):
        features = z.shape[-1]
        z = forward_complex_mlp(z, params[f"layer{i}"], features, features)
        if i < n - 1:
            z = z.map(act)
    return z
