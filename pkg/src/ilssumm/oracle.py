"""Exact solvers, the restart baseline and optimality percentages."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, Solution
from .local_search import LocalSearchParams, local_search
from .objective import DistanceMatrix, td_of_minima

ENUMERATION_MAX_N = 20


@dataclass
class OracleResult:
    solution: Solution
    td_optimal: float
    nodes_explored: int
    proved_optimal: bool
    incumbent_history: list[tuple[int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class OptimalityReport:
    td_achieved: float
    td_optimal: float
    optimality_percent: float


def exact_solve(
    dm: DistanceMatrix,
    instance: Instance,
    max_nodes: int | None = None,
    max_seconds: float | None = None,
) -> OracleResult:
    """Depth-first branch-and-bound over include/exclude decisions.

    Shots are decided in ascending duration order, so the undecided shots that
    still fit the remaining budget always form a prefix of the remaining
    order. The bound at a node is the TD of (selected + fitting undecided),
    which no completion can beat. Nodes whose bound is not strictly below the
    incumbent are pruned. When a node or time cap fires the best incumbent is
    returned with ``proved_optimal=False``.
    """
    entries = dm.entries
    durations = [float(t) for t in instance.durations]
    budget = instance.budget_s
    order = sorted(range(instance.n), key=lambda i: (durations[i], i))

    start = order[0]
    best_sel = [start]
    best_td = td_of_minima(entries[:, start].tolist())
    history = [(0, best_td)]

    t0 = time.perf_counter()
    nodes = 0
    complete = True
    stack: list[tuple[int, tuple[int, ...]]] = [(0, ())]
    while stack:
        if (max_nodes is not None and nodes >= max_nodes) or (
            max_seconds is not None and time.perf_counter() - t0 > max_seconds
        ):
            complete = False
            break
        k, sel = stack.pop()
        nodes += 1
        parts = [durations[i] for i in sel]
        fitting = []
        for m in range(k, len(order)):
            if math.fsum(parts + [durations[order[m]]]) > budget:
                break
            fitting.append(order[m])
        avail = list(sel) + fitting
        if not avail:
            continue
        bound = td_of_minima(entries[:, avail].min(axis=1).tolist())
        if not bound < best_td:
            continue
        if not fitting:
            # nothing else fits: the completion is `sel` itself, and its TD is the bound
            best_sel, best_td = list(sel), bound
            history.append((nodes, best_td))
            continue
        branch = fitting[0]
        stack.append((k + 1, sel))
        stack.append((k + 1, sel + (branch,)))

    return OracleResult(
        Solution.from_indices(instance, best_sel), best_td, nodes, complete, history
    )


def enumerate_solve(dm: DistanceMatrix, instance: Instance) -> OracleResult:
    """Brute force over every non-empty subset (N <= 20).

    Subset minima are built bit by bit, ``mins[mask | 1<<b] = min(mins[mask],
    d[:, b])``; the high bits beyond 14 are iterated in an outer loop to keep
    memory bounded.
    """
    n = instance.n
    if n > ENUMERATION_MAX_N:
        raise ValueError(f"enumeration is capped at N={ENUMERATION_MAX_N}, got N={n}")
    entries = dm.entries
    durations = np.asarray(instance.durations, dtype=float)
    budget = instance.budget_s
    low = min(n, 14)
    high = n - low

    size = 1 << low
    low_mins = np.full((size, n), np.inf)
    low_sums = np.zeros(size)
    for b in range(low):
        lo = 1 << b
        low_mins[lo : 2 * lo] = np.minimum(low_mins[:lo], entries[:, b])
        low_sums[lo : 2 * lo] = low_sums[:lo] + durations[b]
    masks = np.arange(size)

    def exact_sum(mask: int) -> float:
        return math.fsum(durations[i] for i in range(n) if mask >> i & 1)

    best_td = math.inf
    best_mask = 0
    evaluated = 0
    for h in range(1 << high):
        high_bits = [low + i for i in range(high) if h >> i & 1]
        high_min = entries[:, high_bits].min(axis=1) if high_bits else np.full(n, np.inf)
        high_sum = math.fsum(durations[high_bits]) if high_bits else 0.0
        mins = np.minimum(low_mins, high_min)
        approx = low_sums + high_sum
        full_masks = masks | (h << low)
        fits = approx <= budget
        border = np.abs(approx - budget) <= 1e-12 * (approx + budget)
        for r in np.flatnonzero(border):
            fits[r] = exact_sum(int(full_masks[r])) <= budget
        fits &= full_masks != 0
        rows = np.flatnonzero(fits)
        if rows.size == 0:
            continue
        evaluated += rows.size
        approx_td = mins[rows].sum(axis=1)
        cutoff = approx_td.min() + 1e-9 * (1.0 + abs(approx_td.min()))
        for r in rows[approx_td <= cutoff]:
            td = td_of_minima(mins[r].tolist())
            mask = int(full_masks[r])
            if td < best_td or (td == best_td and mask < best_mask):
                best_td, best_mask = td, mask
    sel = [i for i in range(n) if best_mask >> i & 1]
    return OracleResult(Solution.from_indices(instance, sel), best_td, evaluated, True)


@dataclass
class RestartTrace:
    starts_completed: int = 0
    local_search_steps: int = 0
    timed_out: bool = False
    wall_time_s: float = 0.0


def restart_summ(
    dm: DistanceMatrix,
    instance: Instance,
    params: LocalSearchParams | None = None,
    time_budget_s: float = math.inf,
) -> tuple[Solution, RestartTrace]:
    """Best local minimum over single-shot starts, in index order.

    Starts whose single shot exceeds the budget are skipped. The wall-clock
    budget is checked after each completed start, so at least one start
    always runs.
    """
    if not time_budget_s > 0:
        raise ValueError(f"time budget must be positive, got {time_budget_s}")
    params = params or LocalSearchParams()
    trace = RestartTrace()
    t0 = time.perf_counter()
    best: Solution | None = None
    best_td = math.inf
    for k, shot in enumerate(instance.shots):
        if shot.duration_s > instance.budget_s:
            continue
        outcome = local_search(dm, instance, Solution.from_indices(instance, [k]), params)
        trace.starts_completed += 1
        trace.local_search_steps += outcome.steps_taken
        if outcome.total_distance < best_td:
            best, best_td = outcome.solution, outcome.total_distance
        if time.perf_counter() - t0 >= time_budget_s:
            trace.timed_out = k < instance.n - 1
            break
    trace.wall_time_s = time.perf_counter() - t0
    assert best is not None
    return best, trace


def optimality_percentage(td_achieved: float, td_optimal: float) -> float:
    """``100 * optimal / achieved``; 100 when both are zero."""
    if td_optimal < 0 or td_achieved < 0:
        raise ValueError("total distances must be non-negative")
    if td_achieved < td_optimal:
        raise ValueError(
            f"achieved TD {td_achieved!r} is below the optimum {td_optimal!r}: "
            "the oracle or the solver is wrong"
        )
    if td_achieved == 0:
        return 100.0
    return 100.0 * td_optimal / td_achieved


def optimality_report(td_achieved: float, td_optimal: float) -> OptimalityReport:
    return OptimalityReport(td_achieved, td_optimal, optimality_percentage(td_achieved, td_optimal))


def mean_optimality(percentages) -> float:
    values = list(percentages)
    if not values:
        raise ValueError("no optimality percentages to average")
    return math.fsum(values) / len(values)
