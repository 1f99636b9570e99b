"""Planted synthetic benchmarks shared by the selector and acceptance tests."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata, spearmanr

from modcast.pipeline import enumerate_design_space
from modcast.profiler import DataProfile
from modcast.ranking import RankRow, RankTable
from modcast.selector import fit_recommender, predict_scores, recommend_top_k

PLANTED_BEST = (True, False, "feature", "patch", "mlp")
SPACE = enumerate_design_space(96, 24, 7)
IDS = [c.config_id for c in SPACE]


def random_profile(rng, n_feature=7) -> DataProfile:
    return DataProfile(
        trend=float(rng.uniform()),
        seasonality=float(rng.uniform()),
        stationarity=int(rng.integers(2)),
        shifting=float(rng.uniform()),
        transition=float(rng.uniform(0, 1 / 3)),
        correlation=float(rng.uniform(0, 2)) if n_feature > 1 else None,
        n_feature=n_feature,
        hl_ratio=float(rng.choice([0.25, 0.5, 1.0, 2.0])),
    )


def planted_scores(profile: DataProfile, rng, noise=0.3) -> np.ndarray:
    """True rank scores (1 = best) over SPACE; PLANTED_BEST always ranks 1.0.

    The latent quality is a sum of column effects whose sizes depend on the
    profile (so the ordering of the other configs changes between scenarios)
    but whose signs all favour the planted best, plus noise.
    """
    q = np.empty(len(SPACE))
    for i, c in enumerate(SPACE):
        in_, sd, fusion, embed, arch = c.columns
        v = 0.0
        v += 1.0 * in_ * (0.5 + profile.shifting)
        v -= 0.8 * sd * (0.5 + 0.5 * profile.trend)
        v += 0.6 * (fusion == "feature") * (0.2 + (profile.correlation or 0.0))
        v += {"none": 0.2, "token": -0.4, "patch": 0.9, "invert": 0.3, "freq": 0.5 * profile.seasonality}[embed]
        v += {"mlp": 0.7, "rnn": -0.5, "transformer": 0.1}[arch] * (1.0 + profile.hl_ratio) / 2
        q[i] = v + noise * rng.standard_normal()
    best = IDS.index(SPACE[[c.columns for c in SPACE].index(PLANTED_BEST)].config_id)
    q[best] = q.max() + 1.0
    return rankdata(-q, method="average")


def rank_table(scores) -> RankTable:
    rows = tuple(RankRow(cid, {"mse": float(s)}, float(s)) for cid, s in zip(IDS, scores))
    return RankTable(rows, ("mse",))


def planted_scan_inputs(seed: int, n_scenarios: int = 40, effect: float = 10.0):
    """Scenarios where IN configs rank ``effect`` places better only on above-median shifting data."""
    rng = np.random.default_rng(seed)
    profiles = {f"scen{s}": random_profile(rng) for s in range(n_scenarios)}
    median = np.median([p.shifting for p in profiles.values()])
    uses_in = np.array([c.instance_norm for c in SPACE])
    tables = {}
    for name, p in profiles.items():
        scores = rng.permutation(len(SPACE)) + 1.0
        if p.shifting > median:
            scores -= effect * uses_in
        tables[name] = rank_table(scores)
    return tables, profiles


def null_scan_inputs(seed: int, n_scenarios: int = 40):
    """Rank scores shuffled independently of every property and module."""
    rng = np.random.default_rng(seed)
    profiles, tables = {}, {}
    for s in range(n_scenarios):
        profiles[f"scen{s}"] = random_profile(rng)
        tables[f"scen{s}"] = rank_table(rng.permutation(len(SPACE)) + 1.0)
    return tables, profiles


def recommender_trial(trial: int, n_train: int = 10, held_out: int = 21, k: int = 3):
    """One planted trial: (planted best in the top k?, Spearman on held-out configs)."""
    rng = np.random.default_rng(trial)
    best = [c.columns for c in SPACE].index(PLANTED_BEST)
    others = [i for i in range(len(SPACE)) if i != best]
    hidden = set(rng.choice(others, size=held_out, replace=False).tolist())
    rows = []
    for _ in range(n_train):
        p = random_profile(rng)
        scores = planted_scores(p, rng)
        rows.extend((p, SPACE[i], scores[i]) for i in range(len(SPACE)) if i not in hidden)
    test_profile = random_profile(rng)
    truth = planted_scores(test_profile, rng)
    model = fit_recommender(rows)
    top = recommend_top_k(model, test_profile, k, 96, 24, 7)
    hit = any(c.columns == PLANTED_BEST for c in top)
    idx = sorted(hidden)
    pred = predict_scores(model, test_profile, [SPACE[i] for i in idx])
    rho = float(spearmanr(pred, truth[idx]).statistic)
    return hit, rho
