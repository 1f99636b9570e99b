"""Run a small resumable benchmark grid and read the rank tables.

Four configs, two horizons, two seeds on one synthetic dataset. The grid is
stopped after a few cells and resumed; the finished table is the same as an
uninterrupted run.

    python3 demos/03_mini_benchmark.py
"""

import tempfile
from pathlib import Path

from modcast.benchmark import ExperimentGrid, run_benchmark, scenario_name
from modcast.io import SeriesSource
from modcast.synthetic import sinusoid_trend
from modcast.training import TrainSpec

source = SeriesSource("syn", sinusoid_trend(600, 2, period=24), ("a", "b"), frequency=24)
configs = [
    "in0-sd1-temporal-none-mlp",  # DLinear
    "in1-sd1-temporal-none-mlp",
    "in1-sd0-temporal-patch-mlp",
    "in1-sd0-feature-invert-mlp",
]
grid = ExperimentGrid([source], horizons=[12, 24], lookbacks=[48], configs=configs, seeds=(0, 1), spec=TrainSpec(epochs=3))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "results.csv"
    first = run_benchmark(grid, path, max_new_cells=5)
    print(f"interrupted: {first.new_runs} cells written, complete={first.complete}")
    done = run_benchmark(grid, path)
    print(f"resumed: {done.new_runs} more cells, {len(done.rows)} rows, {done.failures} failures")
    again = run_benchmark(grid, path)
    print(f"rerun: {again.new_runs} new cells")
    for key in sorted(done.rank_tables):
        print(f"\n# {scenario_name(key)}")
        print(done.rank_tables[key].sorted().to_text(), end="")
