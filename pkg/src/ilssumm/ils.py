"""Iterated local search for knapsack-median shot selection (ILS-SUMM).

The outer loop perturbs the best local minimum found so far with strength
``M``, re-optimizes it with :func:`local_search`, and either accepts the new
minimum (resetting ``M`` to 1) or increases ``M``; it stops once ``M``
exceeds ``m_max``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, Solution
from .local_search import LocalSearchParams, init_solution, local_search
from .objective import DistanceMatrix, is_feasible


@dataclass
class IlsParams:
    m_max: int = 5
    local_search: LocalSearchParams = field(default_factory=LocalSearchParams)

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")


@dataclass(frozen=True)
class IlsIteration:
    strength: int
    total_distance: float
    accepted: bool
    perturbed: bool  # False when the perturbation fell back to the input


@dataclass
class IlsTrace:
    initial_total_distance: float = 0.0
    initial_steps: int = 0
    iterations: list[IlsIteration] = field(default_factory=list)
    perturbations: int = 0
    local_search_steps: int = 0
    wall_time_s: float = 0.0


def perturb(instance: Instance, sol: Solution, strength: int) -> Solution:
    """Swap the ``strength`` longest selected shots for the shortest unselected ones.

    Exchanges are applied one at a time: add the shortest shot outside the
    working set, then drop the longest shot of the working set other than the
    one just added (lowest index on ties in both steps). The input is returned
    unchanged if there are fewer than ``strength`` unselected shots or the
    result exceeds the budget.
    """
    if strength < 1:
        raise ValueError(f"perturbation strength must be >= 1, got {strength}")
    n = instance.n
    if n - len(sol.selected) < strength:
        return sol
    durations = instance.durations
    working = np.zeros(n, dtype=bool)
    working[list(sol.selected)] = True
    for _ in range(strength):
        # argmin/argmax return the first (lowest) index on ties
        incoming = int(np.argmin(np.where(working, np.inf, durations)))
        outgoing = int(np.argmax(np.where(working, durations, -np.inf)))
        working[incoming] = True
        working[outgoing] = False
    chosen = np.flatnonzero(working).tolist()
    if not is_feasible(instance, chosen):
        return sol
    return Solution.from_indices(instance, chosen)


def ils_summ(
    dm: DistanceMatrix,
    instance: Instance,
    params: IlsParams | None = None,
) -> tuple[Solution, IlsTrace]:
    params = params or IlsParams()
    ls_params = params.local_search
    t0 = time.perf_counter()
    trace = IlsTrace()

    first = local_search(dm, instance, init_solution(instance), ls_params)
    best, best_td = first.solution, first.total_distance
    trace.initial_total_distance = best_td
    trace.initial_steps = first.steps_taken
    trace.local_search_steps = first.steps_taken

    strength = 1
    while strength <= params.m_max:
        start = perturb(instance, best, strength)
        trace.perturbations += 1
        outcome = local_search(dm, instance, start, ls_params)
        trace.local_search_steps += outcome.steps_taken
        accepted = outcome.total_distance < best_td
        trace.iterations.append(
            IlsIteration(strength, outcome.total_distance, accepted, start is not best)
        )
        if accepted:
            best, best_td = outcome.solution, outcome.total_distance
            strength = 1
        else:
            strength += 1

    trace.wall_time_s = time.perf_counter() - t0
    return best, trace
