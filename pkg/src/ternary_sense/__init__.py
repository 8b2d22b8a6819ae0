"""Ternary spectrum sensing: detect an occupied channel and recognize misuse on top of it.

Single sensors split the energy axis into idle (H0), legitimate (H1) and
misuse (H2) regions with GLRT, Rao or prior-informed one-sided rules; a fusion
center combines hard decisions from ``K`` sensors under global constraints.
"""

from ._version import __version__
from .detector import (
    ConfusionRow,
    DecisionRegions,
    Rule,
    Thresholds,
    UpperCase,
    asymptotic_detection,
    build_regions,
    build_rule,
    build_upper_bound_regions,
    check_overlap_glrt,
    check_overlap_rao,
    compute_eta0,
    confusion_row,
    decide,
    decide_array,
    solve_glrt_thresholds,
    solve_rao_thresholds,
)
from .errors import (
    BracketError,
    DegenerateError,
    DomainError,
    InfeasibleError,
    InvalidParameterError,
    OverlapError,
    SizeLimitError,
    TernarySenseError,
)
from .fusion import (
    FusionPolicy,
    ReportCounts,
    algorithm1,
    build_policy,
    count_pmf,
    enumerate_counts,
    exhaustive_optimal_51,
    fuse_decide,
    oracle_49,
    policy_performance,
)
from .harness import ExperimentSpec, ResultTable, figure_spec, run_cooperative, run_single_sensor, run_two_step_comparison
from .model import Hypothesis, SceneConfig, energy_cdf, energy_sf, energy_statistic, sample_observations

__all__ = [
    "__version__",
    "BracketError",
    "ConfusionRow",
    "DecisionRegions",
    "DegenerateError",
    "DomainError",
    "ExperimentSpec",
    "FusionPolicy",
    "Hypothesis",
    "InfeasibleError",
    "InvalidParameterError",
    "OverlapError",
    "ReportCounts",
    "ResultTable",
    "Rule",
    "SceneConfig",
    "SizeLimitError",
    "TernarySenseError",
    "Thresholds",
    "UpperCase",
    "algorithm1",
    "asymptotic_detection",
    "build_policy",
    "build_regions",
    "build_rule",
    "build_upper_bound_regions",
    "check_overlap_glrt",
    "check_overlap_rao",
    "compute_eta0",
    "confusion_row",
    "count_pmf",
    "decide",
    "decide_array",
    "energy_cdf",
    "energy_sf",
    "energy_statistic",
    "enumerate_counts",
    "exhaustive_optimal_51",
    "figure_spec",
    "fuse_decide",
    "oracle_49",
    "policy_performance",
    "run_cooperative",
    "run_single_sensor",
    "run_two_step_comparison",
    "sample_observations",
    "solve_glrt_thresholds",
    "solve_rao_thresholds",
]
