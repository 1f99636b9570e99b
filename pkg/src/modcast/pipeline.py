"""Pipeline configuration, the design space, the known-model registry and the model graph.

A pipeline runs::

    [normalize] -> [decompose into trend/season branches]
        -> embed -> arrange_for_fusion -> block -> projection head
    -> [sum branches] -> [denormalize]

Projection heads (non-frequency paths) by embedding/fusion/architecture cell:

* ``fold`` (patch embedding, any fusion): channels are folded into the batch, so a
  shared map from the flattened ``tokens x features`` slice to ``H`` runs per channel.
* ``channel`` (temporal fusion, MLP, ``none`` or ``invert`` embedding): the block keeps
  one row per input channel; a shared map from that row to ``H`` runs per channel.
* ``joint`` (every other cell): the whole block output of a sample is flattened and
  mapped to ``H * D`` at once.

The frequency path replaces the head with a complex bin map from ``L // 2 + 1`` to
``(L + H) // 2 + 1`` bins followed by an inverse rFFT of length ``L + H``; the last
``H`` steps are the forecast.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field, replace
from typing import Iterator, Mapping

import numpy as np

from .embed import EMBED_KINDS, EmbedConfig, embed, init_embed, output_layout
from .exceptions import InvalidConfigError, InvalidInputError, NumericalError
from .feedforward import (
    ARCHS,
    FUSIONS,
    FFConfig,
    _transposes,
    arrange_for_fusion,
    block_output_features,
    complex_block_forward,
    forward_block,
    forward_complex_mlp,
    init_block,
    init_complex_block,
    init_complex_linear,
)
from .numerics import ComplexTensor, Tensor, affine, as_tensor, irfft_tensor, parameter
from .preprocess import DEFAULT_EPSILON, DEFAULT_WINDOW, instance_normalize_tensor, series_decompose_tensor

KNOWN_MODELS: dict[tuple, str] = {
    (True, False, "feature", "invert", "transformer"): "iTransformer",
    (True, True, "temporal", "freq", "mlp"): "FITS",
    (True, False, "temporal", "patch", "transformer"): "PatchTST/PAttn",
    (False, True, "temporal", "none", "mlp"): "DLinear",
    (False, True, "feature", "token", "transformer"): "Autoformer",
    (False, False, "temporal", "token", "transformer"): "Informer",
}

DEFAULT_LAYERS = {"mlp": 2, "rnn": 1, "transformer": 1}


@dataclass(frozen=True)
class PipelineConfig:
    instance_norm: bool
    series_decomp: bool
    fusion: str
    embed: EmbedConfig
    ff: FFConfig
    lookback: int
    horizon: int
    channels: int
    decomp_window: int = DEFAULT_WINDOW
    epsilon: float = DEFAULT_EPSILON

    @property
    def columns(self) -> tuple:
        """The five design-space columns (IN, SD, fusion, embedding, architecture)."""
        return (self.instance_norm, self.series_decomp, self.fusion, self.embed.kind, self.ff.arch)

    @property
    def config_id(self) -> str:
        return f"in{int(self.instance_norm)}-sd{int(self.series_decomp)}-{self.fusion}-{self.embed.kind}-{self.ff.arch}"

    @property
    def effective_window(self) -> int:
        return min(self.decomp_window, 2 * self.lookback - 1)


def default_ff(arch: str, **overrides) -> FFConfig:
    overrides.setdefault("layers", DEFAULT_LAYERS[arch])
    return FFConfig(arch=arch, **overrides)


def make_config(
    instance_norm: bool,
    series_decomp: bool,
    fusion: str,
    embed: str,
    arch: str,
    lookback: int,
    horizon: int,
    channels: int,
    embed_options: Mapping | None = None,
    ff_options: Mapping | None = None,
    **extra,
) -> PipelineConfig:
    """Build a config from the five column values plus optional hyperparameters."""
    ecfg = EmbedConfig(kind=embed, **dict(embed_options or {})).fitted_to(lookback)
    return PipelineConfig(
        instance_norm=bool(instance_norm),
        series_decomp=bool(series_decomp),
        fusion=fusion,
        embed=ecfg,
        ff=default_ff(arch, **dict(ff_options or {})),
        lookback=lookback,
        horizon=horizon,
        channels=channels,
        **extra,
    )


def validate_config(c: PipelineConfig) -> list[str]:
    """Every violated constraint, as human-readable strings (empty when valid)."""
    problems = []
    if c.embed.kind == "freq" and c.ff.arch != "mlp":
        problems.append("frequency embedding requires MLP")
    if c.fusion not in FUSIONS:
        problems.append(f"fusion must be one of {FUSIONS}")
    for name in ("lookback", "horizon", "channels"):
        if getattr(c, name) < 1:
            problems.append(f"{name} must be >= 1")
    if c.embed.kind == "patch" and c.embed.patch_len > c.lookback:
        problems.append("patch_len must not exceed lookback")
    if c.embed.kind == "freq" and c.lookback < 2:
        problems.append("frequency embedding needs lookback >= 2")
    if c.decomp_window < 1 or c.decomp_window % 2 == 0:
        problems.append("decomp_window must be an odd positive integer")
    if c.epsilon <= 0:
        problems.append("epsilon must be positive")
    return problems


def enumerate_design_space(
    lookback: int,
    horizon: int,
    channels: int,
    *,
    embeds: tuple = EMBED_KINDS,
    archs: tuple = ARCHS,
    embed_options: Mapping | None = None,
    ff_options: Mapping | None = None,
    **extra,
) -> list[PipelineConfig]:
    """All valid configs in canonical order (IN, SD, fusion, embedding, architecture)."""
    out = []
    for in_, sd, fusion, kind, arch in itertools.product((False, True), (False, True), FUSIONS, embeds, archs):
        c = make_config(in_, sd, fusion, kind, arch, lookback, horizon, channels, embed_options, ff_options, **extra)
        if not validate_config(c):
            out.append(c)
    return out


def config_to_known_model(c: PipelineConfig) -> str | None:
    return KNOWN_MODELS.get(c.columns)


# --- serialization ---------------------------------------------------------------------
def config_to_dict(c: PipelineConfig) -> dict:
    e, f = c.embed, c.ff
    return {
        "in": c.instance_norm,
        "sd": c.series_decomp,
        "fusion": c.fusion,
        "embed": e.kind,
        "ff": f.arch,
        "L": c.lookback,
        "H": c.horizon,
        "D": c.channels,
        "hidden": e.hidden,
        "token_kernel": e.token_kernel,
        "patch_len": e.patch_len,
        "stride": e.stride,
        "layers": f.layers,
        "width": f.width,
        "heads": f.heads,
        "activation": f.activation,
        "ff_mult": f.ff_mult,
        "dropout": f.dropout,
        "decomp_window": c.decomp_window,
        "epsilon": c.epsilon,
    }


def config_from_dict(d: Mapping) -> PipelineConfig:
    def flag(v):
        if isinstance(v, str):
            return v.strip().lower() in ("1", "true", "yes", "y")
        return bool(v)

    try:
        return PipelineConfig(
            instance_norm=flag(d["in"]),
            series_decomp=flag(d["sd"]),
            fusion=str(d["fusion"]),
            embed=EmbedConfig(
                kind=str(d["embed"]),
                hidden=int(d.get("hidden", 64)),
                token_kernel=int(d.get("token_kernel", 3)),
                patch_len=int(d.get("patch_len", 16)),
                stride=int(d.get("stride", 8)),
            ),
            ff=FFConfig(
                arch=str(d["ff"]),
                layers=int(d.get("layers", DEFAULT_LAYERS.get(str(d["ff"]), 1))),
                width=int(d.get("width", 64)),
                heads=int(d.get("heads", 4)),
                activation=str(d.get("activation", "relu")),
                ff_mult=int(d.get("ff_mult", 4)),
                dropout=float(d.get("dropout", 0.0)),
            ),
            lookback=int(d["L"]),
            horizon=int(d["H"]),
            channels=int(d.get("D", 1)),
            decomp_window=int(d.get("decomp_window", DEFAULT_WINDOW)),
            epsilon=float(d.get("epsilon", DEFAULT_EPSILON)),
        )
    except KeyError as exc:
        raise InvalidConfigError(f"config document lacks key {exc.args[0]!r}") from None


# --- model graph ---------------------------------------------------------------------------
def head_mode(c: PipelineConfig) -> str:
    if c.embed.kind == "freq":
        return "freq"
    if c.embed.kind == "patch":
        return "fold"
    if c.fusion == "temporal" and c.ff.arch == "mlp" and c.embed.kind in ("none", "invert"):
        return "channel"
    return "joint"


def arranged_shape(c: PipelineConfig) -> tuple[int, int]:
    """``(S, F)``: middle and last extents the block receives (per batch row)."""
    lay = output_layout(c.embed, 1, c.lookback, c.channels)
    if _transposes(c.fusion, c.ff.arch):
        return lay.channels, lay.tokens
    return lay.tokens, lay.channels


def _head_shape(c: PipelineConfig) -> tuple[int, int]:
    s, f = arranged_shape(c)
    q = block_output_features(c.ff, f)
    mode = head_mode(c)
    if mode == "fold":
        return s * q, c.horizon
    if mode == "channel":
        return q, c.horizon
    return s * q, c.horizon * c.channels


def _uniform(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return parameter(rng.uniform(-bound, bound, size=shape))


def _init_branch(c: PipelineConfig, rng: np.random.Generator) -> dict:
    params: dict = {}
    emb = init_embed(c.embed, c.lookback, c.channels, rng)
    if emb:
        params["embed"] = emb
    s, f = arranged_shape(c)
    if c.embed.kind == "freq":
        block = init_complex_block(c.ff, f, rng)
        if block:
            params["ff"] = block
        params["head"] = init_complex_linear(rng, c.lookback // 2 + 1, (c.lookback + c.horizon) // 2 + 1)
        return params
    block = init_block(c.ff, f, rng)
    if block:
        params["ff"] = block
    n_in, n_out = _head_shape(c)
    params["head"] = {"weight": _uniform(rng, n_in, (n_in, n_out)), "bias": _uniform(rng, n_in, (n_out,))}
    return params


def _flatten(tree: Mapping, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            yield from _flatten(value, name + ".")
        else:
            yield name, value


@dataclass
class ModelInstance:
    config: PipelineConfig
    params: dict
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def branches(self) -> tuple[str, ...]:
        return tuple(self.params)

    @property
    def parameters(self) -> dict[str, Tensor]:
        """Flat ``{dotted.name: tensor}`` view in stable order."""
        return dict(_flatten(self.params))

    @property
    def param_count(self) -> int:
        return int(sum(t.size for t in self.parameters.values()))

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.parameters.items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        for name, tensor in self.parameters.items():
            tensor.data = np.array(state[name], dtype=np.float64)

    def copy(self) -> "ModelInstance":
        twin = compose(self.config, self.seed)
        twin.load_state_dict(self.state_dict())
        twin.meta = dict(self.meta)
        return twin

    def __call__(self, x, rng=None) -> Tensor:
        return forward(self, x, rng=rng)


def compose(c: PipelineConfig, seed: int = 0) -> ModelInstance:
    problems = validate_config(c)
    if problems:
        raise InvalidConfigError("; ".join(problems))
    rng = np.random.default_rng(seed)
    names = ("trend", "season") if c.series_decomp else ("main",)
    return ModelInstance(c, {name: _init_branch(c, rng) for name in names}, seed)


def _stage(t: Tensor, stage: str) -> Tensor:
    if not np.all(np.isfinite(t.data)):
        raise NumericalError("non-finite values", stage=stage)
    return t


def _project(c: PipelineConfig, z: Tensor, head: Mapping, batch: int) -> Tensor:
    mode = head_mode(c)
    d, h = c.channels, c.horizon
    if mode == "fold":
        flat = z.reshape(batch, d, z.shape[1] * z.shape[2])
        return affine(flat, head["weight"], head["bias"]).transpose(0, 2, 1)
    if mode == "channel":
        return affine(z, head["weight"], head["bias"]).transpose(0, 2, 1)
    flat = z.reshape(batch, z.shape[1] * z.shape[2])
    return affine(flat, head["weight"], head["bias"]).reshape(batch, h, d)


def _branch_forward(c: PipelineConfig, params: Mapping, x: Tensor, rng=None) -> Tensor:
    batch = x.shape[0]
    e = embed(x, c.embed, params.get("embed"))
    a = arrange_for_fusion(e, c.fusion, c.ff.arch)
    if c.embed.kind == "freq":
        z = a.data
        if "ff" in params:
            z = complex_block_forward(z, c.ff, params["ff"])
        if c.fusion == "feature":
            z = z.transpose(0, 2, 1)
        n_out = (c.lookback + c.horizon) // 2 + 1
        z = forward_complex_mlp(z, params["head"], c.lookback // 2 + 1, n_out)
        series = irfft_tensor(z.re, z.im, c.lookback + c.horizon)  # [B, D, L+H]
        return _stage(series[:, :, c.lookback :].transpose(0, 2, 1), "projection")
    z = forward_block(a, c.ff, params["ff"], rng) if "ff" in params else a.data
    z = _stage(z, "feed-forward")
    return _stage(_project(c, z, params["head"], batch), "projection")


def forward(m: ModelInstance, x, rng=None) -> Tensor:
    """Forecast ``[B, H, D]`` from a lookback batch ``[B, L, D]``.

    Every stage is a tensor op, so a tensor ``x`` that requires grad receives
    its gradient through denormalization, the branches and normalization.
    """
    c = m.config
    x = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
    if x.ndim != 3 or x.shape[1:] != (c.lookback, c.channels):
        raise InvalidInputError(f"expected [B, {c.lookback}, {c.channels}], got {x.shape}")
    if not np.all(np.isfinite(x.data)):
        raise NumericalError("non-finite input", stage="input")
    if c.instance_norm:
        x, mean, scale = instance_normalize_tensor(x, c.epsilon)
    if c.series_decomp:
        trend, season = series_decompose_tensor(x, c.effective_window)
        inputs = {"trend": trend, "season": season}
    else:
        inputs = {"main": x}
    out = None
    for name, branch_in in inputs.items():
        y = _branch_forward(c, m.params[name], branch_in, rng)
        out = y if out is None else out + y
    if c.instance_norm:
        out = _stage(out * scale + mean, "denormalize")
    return out


def predict(m: ModelInstance, x, batch_size: int = 256) -> np.ndarray:
    """Forward pass without gradient bookkeeping, in chunks."""
    x = np.asarray(x, dtype=np.float64)
    flags = {k: t.requires_grad for k, t in m.parameters.items()}
    params = m.parameters
    for t in params.values():
        t.requires_grad = False
    try:
        chunks = [forward(m, x[i : i + batch_size]).data for i in range(0, len(x), batch_size)]
    finally:
        for k, t in params.items():
            t.requires_grad = flags[k]
    if not chunks:
        return np.zeros((0, m.config.horizon, m.config.channels))
    return np.concatenate(chunks, axis=0)
