"""Goodness-of-fit statistics for multinomial data and their Monte Carlo
power against trend alternatives."""

__version__ = "0.1.0"

from .alternatives import (
    AlternativeSpec,
    builtin_alternative,
    builtin_alternatives,
    load_alternatives,
    normalize,
)
from .errors import BracketError, CapacityError
from .nulldist import (
    CriticalBracket,
    NullDistribution,
    NullDistributionCache,
    count_compositions,
    critical_bracket,
    exact_null_distribution,
    exact_null_distributions,
    mc_null_distribution,
    mc_null_distributions,
    survival_at,
)
from .sampling import SeedSpec, sample_batch, sample_multinomial
from .stats import (
    STUDY_KINDS,
    NullModel,
    ObservedCounts,
    StatisticKind,
    evaluate,
    evaluate_all,
    evaluate_batch,
    partial_deviation_sums,
    weighted_deviation_mean,
)
from .study import (
    PowerEstimate,
    Ranking,
    StudyConfig,
    StudyResult,
    interpolated_power,
    power_at_cutoff,
    rank_statistics,
    run_study,
)

__all__ = [
    "__version__",
    "AlternativeSpec",
    "BracketError",
    "CapacityError",
    "CriticalBracket",
    "NullDistribution",
    "NullDistributionCache",
    "NullModel",
    "ObservedCounts",
    "PowerEstimate",
    "Ranking",
    "STUDY_KINDS",
    "SeedSpec",
    "StatisticKind",
    "StudyConfig",
    "StudyResult",
    "builtin_alternative",
    "builtin_alternatives",
    "count_compositions",
    "critical_bracket",
    "evaluate",
    "evaluate_all",
    "evaluate_batch",
    "exact_null_distribution",
    "exact_null_distributions",
    "interpolated_power",
    "load_alternatives",
    "mc_null_distribution",
    "mc_null_distributions",
    "normalize",
    "partial_deviation_sums",
    "power_at_cutoff",
    "rank_statistics",
    "run_study",
    "sample_batch",
    "sample_multinomial",
    "survival_at",
    "weighted_deviation_mean",
]
