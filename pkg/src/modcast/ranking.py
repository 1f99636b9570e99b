"""Averaged rank scores across configurations within one scenario."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class RankRow:
    config_id: str
    ranks: dict  # metric -> rank (1 = best)
    score: float


@dataclass(frozen=True)
class RankTable:
    rows: tuple[RankRow, ...]
    metrics: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def score(self, config_id: str) -> float:
        for row in self.rows:
            if row.config_id == config_id:
                return row.score
        raise KeyError(config_id)

    def scores(self) -> dict[str, float]:
        return {r.config_id: r.score for r in self.rows}

    def sorted(self) -> "RankTable":
        """Rows ordered best first; ties keep their input order."""
        return RankTable(tuple(sorted(self.rows, key=lambda r: r.score)), self.metrics)

    def to_text(self) -> str:
        header = "config," + ",".join(f"rank_{m}" for m in self.metrics) + ",score"
        lines = [header]
        for r in self.rows:
            ranks = ",".join(_fmt(r.ranks[m]) for m in self.metrics)
            lines.append(f"{r.config_id},{ranks},{_fmt(r.score)}")
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _lookup(report, metric: str):
    if isinstance(report, Mapping):
        return report.get(metric)
    return getattr(report, metric, None)


def rank_scores(results: Mapping[str, object], metrics: Sequence[str]) -> RankTable:
    """Rank each metric ascending (ties share the mean position) and average per config.

    ``results`` maps config id to a :class:`~modcast.metrics.MetricReport` or a
    plain ``{metric: value}`` mapping.
    """
    metrics = tuple(metrics)
    if not metrics:
        raise InvalidInputError("at least one metric is required")
    ids = list(results)
    if not ids:
        return RankTable((), metrics)
    columns = {}
    for m in metrics:
        col = []
        for cid in ids:
            v = _lookup(results[cid], m)
            if v is None or not np.isfinite(float(v)):
                raise InvalidInputError(f"config {cid!r} has no finite value for metric {m!r}")
            col.append(float(v))
        columns[m] = rankdata(col, method="average")
    rows = []
    for i, cid in enumerate(ids):
        ranks = {m: float(columns[m][i]) for m in metrics}
        rows.append(RankRow(cid, ranks, float(np.mean([ranks[m] for m in metrics]))))
    return RankTable(tuple(rows), metrics)
