"""Knapsack-median shot selection for video summarization via iterated local search."""

from .features import FrameImage, HistogramConfig, build_instance, compute_histogram
from .ils import IlsParams, IlsTrace, ils_summ, perturb
from .instance import (
    Instance,
    InstanceError,
    InfeasibleInstanceError,
    MetricKind,
    Shot,
    Solution,
    derive_budget,
    load_instance,
    save_instance,
)
from .local_search import LocalSearchOutcome, LocalSearchParams, best_neighbor, init_solution, local_search
from .objective import DistanceMatrix, NearestCache, build_cache, delta_add, delta_swap, distance_matrix, total_distance
from .oracle import OracleResult, enumerate_solve, exact_solve, optimality_percentage, restart_summ

__all__ = [
    "DistanceMatrix",
    "FrameImage",
    "HistogramConfig",
    "IlsParams",
    "IlsTrace",
    "Instance",
    "InstanceError",
    "InfeasibleInstanceError",
    "LocalSearchOutcome",
    "LocalSearchParams",
    "MetricKind",
    "NearestCache",
    "OracleResult",
    "Shot",
    "Solution",
    "best_neighbor",
    "build_cache",
    "build_instance",
    "compute_histogram",
    "delta_add",
    "delta_swap",
    "derive_budget",
    "distance_matrix",
    "enumerate_solve",
    "exact_solve",
    "ils_summ",
    "init_solution",
    "load_instance",
    "local_search",
    "optimality_percentage",
    "perturb",
    "restart_summ",
    "save_instance",
    "total_distance",
]
