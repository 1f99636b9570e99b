"""Data-property profiler: STL, ADF, the six properties and the task profile."""

from .adf import ADFResult, adf_test, critical_value_5pct, schwert_lags, stationarity_indicator
from .features import FEATURE_NAMES, channel_features
from .profile import (
    ABSENT,
    PROFILE_FIELDS,
    PROPERTY_NAMES,
    DataProfile,
    profile_dataset,
    profile_from_text,
    profile_to_text,
)
from .properties import (
    DEFAULT_THRESHOLDS,
    correlation_value,
    first_zero_crossing,
    seasonality_strength,
    shifting_value,
    tercile_symbols,
    transition_matrix,
    transition_value,
    trend_strength,
)
from .stl import STLResult, acf, default_windows, detect_period, loess, stl_decompose
