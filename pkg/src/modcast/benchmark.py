"""Resumable benchmark grids: every (dataset, L, H, config, seed) cell becomes one results row."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .exceptions import InvalidInputError, ModcastError
from .io import (
    STATUS_FAILED,
    STATUS_OK,
    SeriesSource,
    append_results,
    format_cell,
    read_results,
    result_key,
)
from .metrics import METRIC_NAMES, MetricReport
from .pipeline import PipelineConfig, compose, enumerate_design_space, make_config
from .ranking import RankTable, rank_scores
from .training import TrainSpec, evaluate, train
from .windows import DEFAULT_RATIOS, split_and_window, split_bounds

TASKS = ("multivariate", "univariate")
WORKERS_ENV = "RECIPE_WORKERS"
DEFAULT_RANK_METRICS = ("mse", "mae")


@dataclass(frozen=True)
class ExperimentGrid:
    datasets: Sequence[SeriesSource]
    horizons: Sequence[int]
    lookbacks: Sequence[int]
    configs: Callable[[PipelineConfig], bool] | Sequence[str] | None = None  # filter; None = full space
    seeds: Sequence[int] = (0, 1, 2, 3)
    task: str = "multivariate"
    target: str | None = None  # univariate target column (default last)
    ratios: tuple = DEFAULT_RATIOS
    spec: TrainSpec = field(default_factory=TrainSpec)
    standardize: bool = True
    embed_options: dict | None = None
    ff_options: dict | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvalidInputError(f"task must be one of {TASKS}")
        if not self.datasets or not self.horizons or not self.lookbacks or not self.seeds:
            raise InvalidInputError("datasets, horizons, lookbacks and seeds must be non-empty")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise InvalidInputError("dataset names must be unique")

    def source(self, ds: SeriesSource) -> SeriesSource:
        return ds.select(self.target) if self.task == "univariate" else ds

    def configs_for(self, ds: SeriesSource, lookback: int, horizon: int) -> list[PipelineConfig]:
        space = enumerate_design_space(
            lookback, horizon, self.source(ds).channels, embed_options=self.embed_options, ff_options=self.ff_options
        )
        if self.configs is None:
            return space
        if callable(self.configs):
            return [c for c in space if self.configs(c)]
        wanted = list(self.configs)
        by_id = {c.config_id: c for c in space}
        unknown = [w for w in wanted if w not in by_id]
        if unknown:
            raise InvalidInputError(f"unknown or invalid config ids {unknown}")
        return [c for c in space if c.config_id in set(wanted)]

    def cells(self) -> Iterator[tuple]:
        """(dataset, lookback, horizon, config, seed) in canonical order."""
        for ds in self.datasets:
            for lookback in self.lookbacks:
                for horizon in self.horizons:
                    for c in self.configs_for(ds, lookback, horizon):
                        for seed in self.seeds:
                            yield ds, lookback, horizon, c, seed


def cell_row(ds_name: str, task: str, c: PipelineConfig, seed: int, status: str, report: MetricReport | None) -> dict:
    row = {
        "dataset": ds_name,
        "horizon": c.horizon,
        "task": task,
        "in": c.instance_norm,
        "sd": c.series_decomp,
        "fusion": c.fusion,
        "embed": c.embed.kind,
        "ff": c.ff.arch,
        "seed": seed,
        "lookback": c.lookback,
        "status": status,
    }
    for m in METRIC_NAMES:
        row[m] = None if report is None else report.get(m)
    return {k: format_cell(v) for k, v in row.items()}


def prepare_splits(values: np.ndarray, lookback: int, horizon: int, ratios, standardize: bool, frequency=None):
    """Windows over the series, standardized with training-segment statistics when asked."""
    values = np.asarray(values, dtype=np.float64)
    if standardize:
        train_end, _ = split_bounds(len(values), ratios)
        seg = values[:train_end]
        sd = seg.std(axis=0)
        values = (values - seg.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    return split_and_window(values, lookback, horizon, ratios, frequency=frequency)


def run_cell(ds: SeriesSource, lookback: int, horizon: int, c: PipelineConfig, seed: int, grid: ExperimentGrid) -> dict:
    """Train and test one cell; any library error becomes a failed row."""
    src = grid.source(ds)
    try:
        splits = prepare_splits(src.values, lookback, horizon, grid.ratios, grid.standardize, src.frequency)
        m = compose(c, seed)
        res = train(m, splits[0], grid.spec, splits[1])
        if res.failed:
            return cell_row(ds.name, grid.task, c, seed, STATUS_FAILED, None)
        report = evaluate(m, splits[2], src.frequency)
    except ModcastError:
        return cell_row(ds.name, grid.task, c, seed, STATUS_FAILED, None)
    return cell_row(ds.name, grid.task, c, seed, STATUS_OK, report)


def _run_cell_args(args) -> dict:
    return run_cell(*args)


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInputError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class BenchmarkOutcome:
    rows: list[dict]
    rank_tables: dict  # (dataset, task, lookback, horizon) -> RankTable
    new_runs: int
    failures: int
    complete: bool

    @property
    def exit_status(self) -> int:
        return 0 if self.failures == 0 and self.complete else 1


def run_benchmark(
    grid: ExperimentGrid,
    out_path,
    workers: int | None = None,
    max_new_cells: int | None = None,
    metrics: Sequence[str] = DEFAULT_RANK_METRICS,
) -> BenchmarkOutcome:
    """Run every missing cell, appending rows in canonical grid order.

    Cells whose key is already in ``out_path`` are skipped, so an interrupted
    grid resumes where it stopped. With several workers, finished cells are
    held back until every earlier cell has been written, so the file stays a
    canonical prefix at all times. ``max_new_cells`` stops early (used to
    simulate interruption).
    """
    done = {result_key(r) for r in read_results(out_path)}
    todo = []
    for ds, lookback, horizon, c, seed in grid.cells():
        key = result_key(cell_row(ds.name, grid.task, c, seed, STATUS_OK, None))
        if key not in done:
            todo.append((ds, lookback, horizon, c, seed, grid))
    complete = max_new_cells is None or max_new_cells >= len(todo)
    if max_new_cells is not None:
        todo = todo[:max_new_cells]
    n_workers = worker_count(workers)
    if n_workers == 1 or len(todo) <= 1:
        for args in todo:
            append_results(out_path, [run_cell(*args)])
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            # map() yields in submission order, which is the canonical order
            for row in pool.map(_run_cell_args, todo):
                append_results(out_path, [row])
    rows = read_results(out_path)
    failures = sum(1 for r in rows if r["status"] == STATUS_FAILED)
    return BenchmarkOutcome(rows, scenario_rank_tables(rows, metrics), len(todo), failures, complete)


def config_id_of(row) -> str:
    return f"in{row['in']}-sd{row['sd']}-{row['fusion']}-{row['embed']}-{row['ff']}"


def scenario_key(row) -> tuple:
    return (row["dataset"], row["task"], int(row["lookback"]), int(row["horizon"]))


def seed_averaged(rows: Sequence[dict], metrics: Sequence[str] = METRIC_NAMES) -> dict:
    """scenario -> {config id: {metric: mean over successful seeds}}; failed rows are dropped."""
    groups: dict = {}
    for r in rows:
        if r.get("status", STATUS_OK) != STATUS_OK:
            continue
        groups.setdefault(scenario_key(r), {}).setdefault(config_id_of(r), []).append(r)
    out = {}
    for scen, configs in groups.items():
        out[scen] = {}
        for cid, rs in configs.items():
            means = {}
            for m in metrics:
                vals = [r[m] for r in rs]
                means[m] = None if any(v is None for v in vals) else float(np.mean(vals))
            out[scen][cid] = means
    return out


def scenario_rank_tables(rows: Sequence[dict], metrics: Sequence[str] = DEFAULT_RANK_METRICS) -> dict:
    tables = {}
    for scen, configs in seed_averaged(rows, metrics).items():
        usable = {cid: v for cid, v in configs.items() if all(v[m] is not None for m in metrics)}
        if usable:
            tables[scen] = rank_scores(usable, metrics)
    return tables


def scenario_name(key: tuple) -> str:
    dataset, task, lookback, horizon = key
    return f"{dataset}/{task}/L{lookback}/H{horizon}"


__all__ = [
    "BenchmarkOutcome",
    "ExperimentGrid",
    "RankTable",
    "TASKS",
    "WORKERS_ENV",
    "cell_row",
    "config_id_of",
    "make_config",
    "prepare_splits",
    "run_benchmark",
    "run_cell",
    "scenario_key",
    "scenario_name",
    "scenario_rank_tables",
    "seed_averaged",
    "worker_count",
]
