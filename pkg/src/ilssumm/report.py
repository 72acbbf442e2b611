"""Solver dispatch and the structured reports written by the CLI.

Every report re-derives its total distance from the selected shot ids with a
freshly built distance matrix, and refuses to emit a value that disagrees
with the solver's by more than 1e-9 relative.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any

from .ils import IlsParams, ils_summ
from .instance import Instance, Solution
from .local_search import LocalSearchParams, init_solution, local_search
from .objective import distance_matrix, total_distance
from .oracle import exact_solve, optimality_percentage, restart_summ

METHODS = ("ils", "local", "restart", "exact")
WALL_TIME_FIELDS = ("wall_time_ms", "runtime_pct_of_video")
DEFAULT_EXACT_MAX_N = 24


class AuditError(RuntimeError):
    """Reported total distance does not match an independent recompute."""


@dataclass
class SolverConfig:
    m_max: int = 5
    max_trials: int = 10_000
    add_first: bool = True
    time_budget_s: float | None = None  # restart; defaults to the video length
    max_nodes: int | None = None  # exact
    max_seconds: float | None = None  # exact

    def ils_params(self) -> IlsParams:
        return IlsParams(self.m_max, self.local_search_params())

    def local_search_params(self) -> LocalSearchParams:
        return LocalSearchParams(self.max_trials, self.add_first)


@dataclass
class SolveReport:
    instance: str
    method: str
    selected: list[str]
    selected_indices: list[int]
    total_distance: float
    duration_used_s: float
    budget_s: float
    metric: str
    n_shots: int
    counters: dict[str, int] = field(default_factory=dict)
    proved_optimal: bool | None = None
    td_optimal: float | None = None
    optimality_percent: float | None = None
    notes: list[str] = field(default_factory=list)
    wall_time_ms: float = 0.0
    runtime_pct_of_video: float | None = None

    def to_dict(self, include_wall_time: bool = True) -> dict[str, Any]:
        doc = asdict(self)
        if not include_wall_time:
            for key in WALL_TIME_FIELDS:
                doc.pop(key, None)
        return doc


@dataclass
class BenchRow:
    instance: str
    method: str
    td: float | None = None
    optimality_percent: float | None = None
    wall_time_ms: float | None = None
    runtime_pct_of_video: float | None = None

    COLUMNS = ("instance", "method", "td", "optimality_percent", "wall_time_ms", "runtime_pct_of_video")

    def as_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, c)) for c in self.COLUMNS]


def runtime_percent(wall_time_s: float, video_duration_s: float | None) -> float | None:
    if video_duration_s is None:
        return None
    return 100.0 * wall_time_s / video_duration_s


def audit(instance: Instance, report: SolveReport) -> None:
    sol = Solution.from_ids(instance, report.selected)
    recomputed = total_distance(distance_matrix(instance), sol)
    if not math.isclose(recomputed, report.total_distance, rel_tol=1e-9, abs_tol=1e-12):
        raise AuditError(
            f"reported TD {report.total_distance!r} != recomputed {recomputed!r} for {report.instance}"
        )


def solve(
    instance: Instance,
    method: str,
    config: SolverConfig | None = None,
    video_duration_s: float | None = None,
    td_optimal: float | None = None,
) -> SolveReport:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    config = config or SolverConfig()
    t0 = time.perf_counter()
    dm = distance_matrix(instance)
    counters: dict[str, int] = {}
    notes: list[str] = []
    proved = None

    if method == "ils":
        sol, trace = ils_summ(dm, instance, config.ils_params())
        counters = {
            "local_search_steps": trace.local_search_steps,
            "perturbations": trace.perturbations,
            "outer_iterations": len(trace.iterations),
            "improvements": sum(it.accepted for it in trace.iterations),
        }
        notes.append("perturbation never removes the shot added in the same exchange")
    elif method == "local":
        outcome = local_search(dm, instance, init_solution(instance), config.local_search_params())
        sol = outcome.solution
        counters = {"local_search_steps": outcome.steps_taken, "converged": int(outcome.converged)}
    elif method == "restart":
        budget = config.time_budget_s
        if budget is None:
            budget = video_duration_s if video_duration_s is not None else instance.total_duration_s
        sol, rtrace = restart_summ(dm, instance, config.local_search_params(), budget)
        counters = {
            "local_search_steps": rtrace.local_search_steps,
            "restarts": rtrace.starts_completed,
            "timed_out": int(rtrace.timed_out),
        }
    else:
        result = exact_solve(dm, instance, config.max_nodes, config.max_seconds)
        sol = result.solution
        proved = result.proved_optimal
        counters = {"oracle_nodes": result.nodes_explored}
        if proved:
            td_optimal = result.td_optimal

    td = total_distance(dm, sol)
    elapsed = time.perf_counter() - t0
    report = SolveReport(
        instance=instance.name,
        method=method,
        selected=[instance.shots[i].id for i in sol.selected],
        selected_indices=list(sol.selected),
        total_distance=td,
        duration_used_s=sol.duration_used_s,
        budget_s=instance.budget_s,
        metric=instance.metric.value,
        n_shots=instance.n,
        counters=counters,
        proved_optimal=proved,
        td_optimal=td_optimal,
        optimality_percent=None if td_optimal is None else optimality_percentage(td, td_optimal),
        notes=notes,
        wall_time_ms=1000.0 * elapsed,
        runtime_pct_of_video=runtime_percent(elapsed, video_duration_s),
    )
    audit(instance, report)
    return report
