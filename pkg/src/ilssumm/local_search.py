"""Steepest-descent local search over the feasible add / single-swap neighborhood."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, Solution
from . import neighborhood
from .objective import DistanceMatrix, NearestCache, build_cache, cache_add, cache_swap

log = logging.getLogger(__name__)

# deltas within this fraction of (1 + TD) are rounding noise: such moves
# count as non-improving, and such differences between moves as ties
TIE_RTOL = 1e-13


@dataclass
class LocalSearchParams:
    max_trials: int = 10_000
    # consider swaps only when no improving feasible add exists
    add_first: bool = True

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError(f"max_trials must be >= 1, got {self.max_trials}")


@dataclass(frozen=True)
class Move:
    kind: str  # "add" or "swap"
    incoming: int
    outgoing: int | None
    delta: float

    def apply(self, selected) -> list[int]:
        out = [s for s in selected if s != self.outgoing]
        out.append(self.incoming)
        return sorted(out)


@dataclass
class LocalSearchOutcome:
    solution: Solution
    steps_taken: int
    converged: bool
    total_distance: float
    td_history: list[float] = field(default_factory=list)


def init_solution(instance: Instance) -> Solution:
    """The single shortest shot (lowest index on ties)."""
    durations = instance.durations
    return Solution.from_indices(instance, [int(np.argmin(durations))])


def best_neighbor(
    dm: DistanceMatrix,
    instance: Instance,
    sol,
    add_first: bool = True,
    cache: NearestCache | None = None,
) -> Move | None:
    selected = sorted(sol.selected if isinstance(sol, Solution) else sol)
    if cache is None:
        cache = build_cache(dm, selected)
    mask = np.ones(instance.n, dtype=bool)
    mask[selected] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        return None

    durations = instance.durations
    budget = instance.budget_s
    tol = TIE_RTOL * (1.0 + cache.td)
    found = neighborhood.best_add(dm, durations, budget, cache, candidates, tol)
    add = None
    if found is not None and found[1] < -tol:
        add = Move("add", found[0], None, found[1])
    if add_first and add is not None:
        return add
    found = neighborhood.best_swap(dm, durations, budget, cache, candidates, tol)
    swap = None
    if found is not None and found[2] < -tol:
        swap = Move("swap", found[0], found[1], found[2])
    if add is None:
        return swap
    if swap is None:
        return add
    # an add (no outgoing shot) wins ties against swaps with the same incoming shot
    if abs(add.delta - swap.delta) <= tol:
        return add if add.incoming <= swap.incoming else swap
    return add if add.delta < swap.delta else swap


def local_search(
    dm: DistanceMatrix,
    instance: Instance,
    start: Solution,
    params: LocalSearchParams | None = None,
) -> LocalSearchOutcome:
    params = params or LocalSearchParams()
    selected = list(start.selected)
    cache = build_cache(dm, selected)
    td = cache.td
    history = [td]
    steps = 0
    converged = False
    while steps < params.max_trials:
        move = best_neighbor(dm, instance, selected, params.add_first, cache)
        if move is None:
            converged = True
            break
        new_selected = move.apply(selected)
        if move.kind == "add":
            new_cache = cache_add(dm, cache, move.incoming)
        else:
            new_cache = cache_swap(dm, cache, move.outgoing, move.incoming)
        new_td = new_cache.td
        if not new_td < td:
            # float delta said "improving" but the exact TD disagrees
            log.debug("rejecting move %s: exact TD %r -> %r", move, td, new_td)
            converged = True
            break
        selected, cache, td = new_selected, new_cache, new_td
        history.append(td)
        steps += 1
    solution = Solution.from_indices(instance, selected)
    return LocalSearchOutcome(solution, steps, converged, td, history)
