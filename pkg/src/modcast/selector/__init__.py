"""Effectiveness analysis over benchmark results and the boosted-tree recommender."""

from .gbrt import BoostedEnsemble, RegressionTree, fit_boosted_trees, fit_tree
from .recommend import (
    FEATURE_NAMES,
    config_columns,
    encode_config,
    encode_profile,
    encode_rows,
    fit_by_setting,
    fit_recommender,
    predict_scores,
    recommend_top_k,
)
from .stats import (
    CHOICES,
    SETTINGS,
    EffectClaim,
    ScanResult,
    claims_to_text,
    effectiveness_scan,
    holm_adjust,
    parse_config_id,
    welch_t_test,
)
