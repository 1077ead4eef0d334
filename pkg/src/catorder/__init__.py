"""Nonparametric inference of dominance orders between categories of real values."""

from .core import (
    AnalysisConfig,
    ConfidenceInterval,
    DataError,
    GroupedData,
    ObservationSet,
    group_by_category,
)
from .dominance import (
    DominanceNetwork,
    DominanceResult,
    check_lower_bound_rule,
    dominated_set,
    infer_dominance,
    infer_network,
    network_density,
)
from .estimator import DominanceOrdering
from .resampling import (
    ReplicateSet,
    RngStream,
    bca_ci,
    bootstrap_mean,
    bootstrap_mean_diff,
    mean_ci,
    mean_diff_ci,
    normal_ci,
    percentile_ci,
)
from .significance import (
    PairTestResult,
    adjust_benjamini_yekutieli,
    mann_whitney_one_sided,
    pooled_t_one_sided,
    welch_t_one_sided,
)

__version__ = "0.1.0"
