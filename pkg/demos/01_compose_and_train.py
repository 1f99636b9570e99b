"""Compose one pipeline, train it on a synthetic series and compare it with persistence.

The config is IN on, SD on, temporal fusion, no embedding and an MLP block,
the DLinear-style cell with instance normalization added.

    python3 demos/01_compose_and_train.py
"""

import numpy as np

from modcast.benchmark import prepare_splits
from modcast.metrics import naive_persistence
from modcast.pipeline import compose, config_to_known_model, make_config
from modcast.synthetic import sinusoid_trend
from modcast.training import TrainSpec, evaluate, train

L, H = 96, 24
series = sinusoid_trend(2000, 3, period=24, seed=0)  # [T, D]
train_set, val_set, test_set = prepare_splits(series, L, H, (0.7, 0.1, 0.2), True, 24)
print(f"windows: train {len(train_set)}, val {len(val_set)}, test {len(test_set)}")

c = make_config(True, True, "temporal", "none", "mlp", L, H, 3)
m = compose(c, seed=0)
print(f"config {c.config_id} ({config_to_known_model(c) or 'no registry name'}), {m.param_count} parameters")

res = train(m, train_set, TrainSpec(lr=1e-3, epochs=10), val_set)
for epoch, (tl, vl) in enumerate(zip(res.train_loss, res.val_loss)):
    print(f"epoch {epoch:2d}  train {tl:.4f}  val {vl:.4f}")
print(f"restored best epoch {res.best_epoch}")

report = evaluate(m, test_set, 24)
persistence = np.mean((naive_persistence(test_set.X, H) - test_set.Y) ** 2)
print(f"test mse {report.mse:.4f}  mae {report.mae:.4f}  smape {report.smape:.2f}")
print(f"persistence mse {persistence:.4f}  ({1 - report.mse / persistence:.1%} lower)")
