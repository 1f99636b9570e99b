"""CSV ingestion and the append-only results table."""

from __future__ import annotations

import csv
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import InvalidInputError
from .metrics import METRIC_NAMES

TIMESTAMP_COLUMN = "date"

KEY_COLUMNS = ("dataset", "horizon", "task", "in", "sd", "fusion", "embed", "ff", "seed", "lookback")
RESULT_COLUMNS = KEY_COLUMNS + ("status",) + METRIC_NAMES
STATUS_OK = "ok"
STATUS_FAILED = "failed"

_write_lock = threading.Lock()


class ParseError(InvalidInputError):
    """A CSV cell could not be read; carries the 1-based file row and the column name."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = ", ".join(p for p in (f"row {row}" if row else "", f"column {column!r}" if column else "") if p)
        super().__init__(f"{where}: {message}" if where else message)
        self.row, self.column = row, column


@dataclass(frozen=True)
class SeriesSource:
    name: str
    values: np.ndarray  # [T, D]
    column_names: tuple[str, ...]
    frequency: int | None = None
    timestamp_column: str | None = None

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def select(self, column: str | None = None) -> "SeriesSource":
        """Univariate view on ``column`` (default: the last column)."""
        name = column or self.column_names[-1]
        if name not in self.column_names:
            raise InvalidInputError(f"no column {name!r} in {self.name}")
        j = self.column_names.index(name)
        return SeriesSource(self.name, self.values[:, j : j + 1], (name,), self.frequency, self.timestamp_column)


def load_csv(
    path,
    target: str | None = None,
    fill: str = "error",
    frequency: int | None = None,
    name: str | None = None,
) -> SeriesSource:
    """Read a header + numeric-columns file; a first column named ``date`` is kept aside.

    ``fill="error"`` rejects empty cells, ``fill="ffill"`` carries the previous
    value forward (a gap on the first data row is still an error). ``target``
    selects a single column for univariate tasks.
    """
    path = Path(path)
    if fill not in ("error", "ffill"):
        raise InvalidInputError(f"unknown fill mode {fill!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if len(rows) < 2:
        raise InvalidInputError(f"{path} has a header but no data rows")
    ts = header[0] if header[0].lower() == TIMESTAMP_COLUMN else None
    first = 1 if ts else 0
    names = tuple(header[first:])
    if not names:
        raise InvalidInputError(f"{path} has no value columns")
    values = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:]):
        file_row = i + 2
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", file_row)
        for j, cell in enumerate(row[first:]):
            cell = cell.strip()
            if cell == "":
                if fill == "ffill" and i > 0:
                    values[i, j] = values[i - 1, j]
                    continue
                raise ParseError("missing value", file_row, names[j])
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value {cell!r}", file_row, names[j]) from None
            if not np.isfinite(values[i, j]):
                raise ParseError(f"non-finite value {cell!r}", file_row, names[j])
    src = SeriesSource(name or path.stem, values, names, frequency, ts)
    return src.select(target) if target else src


def save_csv(path, values, column_names: Sequence[str] | None = None, with_date: bool = False) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    names = list(column_names or [f"x{j}" for j in range(values.shape[1])])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(([TIMESTAMP_COLUMN] if with_date else []) + names)
        for t, row in enumerate(values):
            w.writerow(([t] if with_date else []) + [repr(float(v)) for v in row])


# --- results table ----------------------------------------------------------------
def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def result_key(row: Mapping) -> tuple[str, ...]:
    return tuple(format_cell(row[k]) for k in KEY_COLUMNS)


def read_results(path) -> list[dict]:
    """Rows as string dicts; metrics parsed to float (empty -> None). Missing file -> []."""
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in KEY_COLUMNS + METRIC_NAMES if c not in reader.fieldnames]
        if missing:
            raise InvalidInputError(f"{path} lacks result columns {missing}")
        out = []
        for row in reader:
            parsed = dict(row)
            for m in METRIC_NAMES:
                parsed[m] = float(row[m]) if row[m] not in ("", None) else None
            parsed.setdefault("status", STATUS_OK)
            out.append(parsed)
        return out


def append_results(path, rows: Iterable[Mapping]) -> int:
    """Append complete rows (header written for a new file); returns the number written."""
    path = Path(path)
    rows = list(rows)
    if not rows:
        return 0
    with _write_lock:
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(RESULT_COLUMNS)
            for row in rows:
                w.writerow([format_cell(row.get(c)) for c in RESULT_COLUMNS])
            fh.flush()
            os.fsync(fh.fileno())
    return len(rows)
