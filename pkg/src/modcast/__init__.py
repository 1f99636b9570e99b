"""Modular time-series forecasting pipelines on numpy.

A pipeline is five stages: optional instance normalization and series
decomposition, an embedding, a feed-forward block under temporal or feature
fusion, and a projection head. :func:`enumerate_design_space` lists every valid
combination; :func:`compose` builds a trainable model for one of them. The
:mod:`modcast.profiler` and :mod:`modcast.selector` subpackages characterize
datasets and recommend configurations from benchmark results.
"""

from .embed import EMBED_KINDS, EmbedConfig, embed
from .exceptions import (
    DegenerateSeriesWarning,
    InvalidCombinationError,
    InvalidConfigError,
    InvalidInputError,
    ModcastError,
    NumericalError,
    UndefinedPropertyError,
)
from .feedforward import ARCHS, FUSIONS, FFConfig, arrange_for_fusion, forward_block
from .metrics import MetricReport, compute_metrics, naive2_forecast, naive_persistence
from .pipeline import (
    KNOWN_MODELS,
    ModelInstance,
    PipelineConfig,
    compose,
    config_from_dict,
    config_to_dict,
    config_to_known_model,
    enumerate_design_space,
    forward,
    make_config,
    predict,
    validate_config,
)
from .preprocess import instance_denormalize, instance_normalize, series_decompose
from .ranking import RankTable, rank_scores
from .training import Adam, TrainResult, TrainSpec, evaluate, run_seeds, train
from .windows import WindowedDataset, split_and_window

__version__ = "0.1.0"
