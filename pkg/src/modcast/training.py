"""Mean-squared-error training with Adam, evaluation and seed averaging."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .exceptions import InvalidInputError, NumericalError
from .metrics import METRIC_NAMES, MetricReport, compute_metrics, naive2_forecast, owa_score
from .numerics import Tensor, mse_loss
from .pipeline import ModelInstance, PipelineConfig, compose, forward, predict
from .windows import WindowedDataset

DEFAULT_SEEDS = (0, 1, 2, 3)


@dataclass(frozen=True)
class TrainSpec:
    lr: float = 1e-3
    epochs: int = 10
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    shuffle: bool = True
    seed: int | None = None  # defaults to the model seed

    def __post_init__(self):
        if self.lr < 0 or self.epochs < 0 or self.batch_size < 1:
            raise InvalidInputError("lr and epochs must be non-negative, batch_size positive")


@dataclass
class TrainResult:
    model: ModelInstance
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int | None = None
    failed: bool = False
    failed_epoch: int | None = None
    message: str = ""


class Adam:
    """Adaptive-moment optimizer over a flat ``{name: Tensor}`` mapping."""

    def __init__(self, params: Mapping[str, Tensor], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = dict(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.t = 0

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            with np.errstate(over="ignore", invalid="ignore"):
                self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
                self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            if not (np.all(np.isfinite(self.m[k])) and np.all(np.isfinite(self.v[k]))):
                raise NumericalError(f"non-finite optimizer state for {k}", stage="optimizer")
            if self.lr == 0.0:
                continue
            p.data = p.data - self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def dataset_loss(m: ModelInstance, data: WindowedDataset, batch_size: int = 256) -> float:
    if len(data) == 0:
        return float("nan")
    pred = predict(m, data.X, batch_size)
    return float(np.mean((pred - data.Y) ** 2))


def train(
    m: ModelInstance,
    data: WindowedDataset,
    spec: TrainSpec | None = None,
    val: WindowedDataset | None = None,
) -> TrainResult:
    """Fit ``m`` in place on the training windows and return it with its loss trace.

    After each epoch the validation MSE is measured when ``val`` has windows and
    the best-scoring parameters are restored at the end. A non-finite loss stops
    training and yields a failed result carrying the epoch index.
    """
    spec = spec or TrainSpec()
    if data.split != "train":
        raise InvalidInputError(f"train() needs the train split, got {data.split!r}")
    if len(data) == 0:
        raise InvalidInputError("training split has no windows")
    rng = np.random.default_rng(m.seed if spec.seed is None else spec.seed)
    params = m.parameters
    opt = Adam(params, spec.lr, spec.beta1, spec.beta2, spec.eps)
    result = TrainResult(m)
    use_val = val is not None and len(val) > 0
    best_state, best_val = m.state_dict(), np.inf
    n = len(data)
    for epoch in range(spec.epochs):
        order = rng.permutation(n) if spec.shuffle else np.arange(n)
        total = 0.0
        try:
            for start in range(0, n, spec.batch_size):
                idx = order[start : start + spec.batch_size]
                opt.zero_grad()
                loss = mse_loss(forward(m, data.X[idx], rng=rng), data.Y[idx])
                if not np.isfinite(loss.data):
                    raise NumericalError("non-finite loss", stage="training")
                loss.backward()
                opt.step()
                total += float(loss.data) * len(idx)
        except NumericalError as exc:
            result.failed, result.failed_epoch, result.message = True, epoch, str(exc)
            m.load_state_dict(best_state)
            return result
        result.train_loss.append(total / n)
        if use_val:
            v = dataset_loss(m, val)
            result.val_loss.append(v)
            if np.isfinite(v) and v < best_val:
                best_val, best_state, result.best_epoch = v, m.state_dict(), epoch
        else:
            best_state, result.best_epoch = m.state_dict(), epoch
    m.load_state_dict(best_state)
    return result


def evaluate(
    m: ModelInstance,
    data: WindowedDataset,
    season: int | None = None,
    with_owa: bool = True,
    mase_scaling: str = "horizon",
) -> MetricReport:
    """Metrics over every window of ``data``.

    MSE and MAE pool all points; SMAPE and MASE average the per-window values
    (windows with an undefined MASE are skipped). OWA compares those averages
    with the same averages for Naive2 forecasts built from each lookback.
    """
    if len(data) == 0:
        raise InvalidInputError(f"{data.split} split has no windows")
    pred = predict(m, data.X)
    return score_forecasts(pred, data, season, with_owa, mase_scaling)


def score_forecasts(pred, data: WindowedDataset, season=None, with_owa=True, mase_scaling="horizon") -> MetricReport:
    s = season or data.frequency or 1
    pred = np.asarray(pred, dtype=np.float64)
    err = pred - data.Y

    def averaged(forecasts):
        reports = [
            compute_metrics(f, y, s, history=x, mase_scaling=mase_scaling)
            for f, y, x in zip(forecasts, data.Y, data.X)
        ]
        smapes = float(np.mean([r.smape for r in reports]))
        mases = [r.mase for r in reports if r.mase is not None]
        return smapes, (float(np.mean(mases)) if mases else None)

    smape_v, mase_v = averaged(pred)
    owa = None
    if with_owa and mase_v is not None:
        ref = np.stack([naive2_forecast(x, data.horizon, s) for x in data.X])
        smape_n2, mase_n2 = averaged(ref)
        if mase_n2 is not None:
            owa = owa_score(smape_v, mase_v, smape_n2, mase_n2)
    return MetricReport(float(np.mean(err**2)), float(np.mean(np.abs(err))), smape_v, mase_v, owa)


def mean_report(reports: Sequence[MetricReport]) -> MetricReport:
    """Arithmetic mean of each metric; a metric undefined in any report stays undefined."""
    if not reports:
        raise InvalidInputError("no reports to average")
    values = {}
    for name in METRIC_NAMES:
        col = [r.get(name) for r in reports]
        values[name] = None if any(v is None for v in col) else float(np.mean(col))
    return MetricReport(**values)


@dataclass
class SeedRuns:
    report: MetricReport | None
    per_seed: dict  # seed -> MetricReport
    failures: dict  # seed -> message
    traces: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.failures)


def run_seeds(
    c: PipelineConfig,
    data: tuple[WindowedDataset, WindowedDataset, WindowedDataset],
    seeds: Sequence[int] = DEFAULT_SEEDS,
    spec: TrainSpec | None = None,
    season: int | None = None,
) -> SeedRuns:
    """Train and test one config per seed and average the test reports over successful seeds."""
    if len(seeds) == 0:
        raise InvalidInputError("seeds must be non-empty")
    train_set, val_set, test_set = data
    per_seed, failures, traces = {}, {}, {}
    for seed in seeds:
        m = compose(c, seed)
        res = train(m, train_set, spec, val_set)
        traces[seed] = res.train_loss
        if res.failed:
            failures[seed] = f"epoch {res.failed_epoch}: {res.message}"
            continue
        per_seed[seed] = evaluate(m, test_set, season)
    report = mean_report(list(per_seed.values())) if per_seed else None
    return SeedRuns(report, per_seed, failures, traces)
