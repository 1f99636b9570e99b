"""Training-free configuration recommender: profile + config -> predicted rank score."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..embed import EMBED_KINDS
from ..exceptions import InvalidInputError
from ..feedforward import ARCHS, FUSIONS
from ..pipeline import PipelineConfig, enumerate_design_space
from ..profiler import PROFILE_FIELDS, DataProfile
from .gbrt import BoostedEnsemble, fit_boosted_trees

DEFAULT_TREES = 200
DEFAULT_DEPTH = 3
DEFAULT_SHRINKAGE = 0.1
MIN_ROWS = 50

_ONE_HOT = (
    ("in", (False, True)),
    ("sd", (False, True)),
    ("fusion", FUSIONS),
    ("embed", EMBED_KINDS),
    ("arch", ARCHS),
)

FEATURE_NAMES = (
    tuple(PROFILE_FIELDS)
    + tuple(f"has_{f}" for f in PROFILE_FIELDS)
    + tuple(f"{col}={v}" for col, values in _ONE_HOT for v in values)
)


def config_columns(config) -> tuple:
    """(IN, SD, fusion, embed, arch) from a config or a plain 5-tuple."""
    if isinstance(config, PipelineConfig):
        return config.columns
    cols = tuple(config)
    if len(cols) != 5:
        raise InvalidInputError(f"expected five config columns, got {cols}")
    return (bool(cols[0]), bool(cols[1]), cols[2], cols[3], cols[4])


def encode_profile(profile: DataProfile) -> np.ndarray:
    """Eight values (absent -> 0) followed by eight presence flags."""
    raw = profile.as_dict()
    values = [0.0 if raw[f] is None else float(raw[f]) for f in PROFILE_FIELDS]
    present = [0.0 if raw[f] is None else 1.0 for f in PROFILE_FIELDS]
    return np.array(values + present)


def encode_config(config) -> np.ndarray:
    cols = config_columns(config)
    out = []
    for value, (_, options) in zip(cols, _ONE_HOT):
        if value not in options:
            raise InvalidInputError(f"unknown column value {value!r}")
        out.extend(1.0 if value == o else 0.0 for o in options)
    return np.array(out)


def encode_rows(rows: Iterable[tuple]) -> tuple[np.ndarray, np.ndarray]:
    X, y = [], []
    cache = {}
    for profile, config, score in rows:
        key = id(profile)
        if key not in cache:
            cache[key] = encode_profile(profile)
        X.append(np.concatenate([cache[key], encode_config(config)]))
        y.append(float(score))
    return np.array(X), np.array(y)


def fit_recommender(
    rows: Sequence[tuple],
    n_trees: int = DEFAULT_TREES,
    depth: int = DEFAULT_DEPTH,
    shrinkage: float = DEFAULT_SHRINKAGE,
) -> BoostedEnsemble:
    """Boosted trees on ``(profile, config, rank score)`` rows."""
    rows = list(rows)
    if len(rows) < MIN_ROWS:
        raise InvalidInputError(f"need at least {MIN_ROWS} rows, got {len(rows)}")
    seen = [set() for _ in range(5)]
    for _, config, _ in rows:
        for i, v in enumerate(config_columns(config)):
            seen[i].add(v)
    thin = [name for (name, _), vals in zip(_ONE_HOT, seen) if len(vals) < 2]
    if thin:
        raise InvalidInputError(f"config columns observed with a single value: {thin}")
    X, y = encode_rows(rows)
    return fit_boosted_trees(X, y, n_trees, depth, shrinkage, FEATURE_NAMES)


def fit_by_setting(rows: Sequence[tuple], **hyper) -> dict[str, BoostedEnsemble]:
    """Separate ensembles for univariate (one feature) and multivariate profiles."""
    groups: dict[str, list] = {}
    for row in rows:
        setting = "univariate" if row[0].n_feature == 1 else "multivariate"
        groups.setdefault(setting, []).append(row)
    return {s: fit_recommender(g, **hyper) for s, g in groups.items()}


def predict_scores(model: BoostedEnsemble, profile: DataProfile, configs: Sequence) -> np.ndarray:
    p = encode_profile(profile)
    X = np.array([np.concatenate([p, encode_config(c)]) for c in configs])
    return model.predict(X)


def recommend_top_k(
    model: BoostedEnsemble,
    profile: DataProfile,
    k: int,
    lookback: int,
    horizon: int,
    channels: int,
    **space_options,
) -> list[PipelineConfig]:
    """The ``k`` valid configs with the lowest predicted rank; ties keep canonical order."""
    space = enumerate_design_space(lookback, horizon, channels, **space_options)
    if not 1 <= k <= len(space):
        raise InvalidInputError(f"k must lie in [1, {len(space)}], got {k}")
    scores = predict_scores(model, profile, space)
    order = np.argsort(scores, kind="stable")[:k]
    return [space[i] for i in order]
