"""Total-distance objective with incremental evaluation of add/swap moves.

``TD(S) = sum_i min_{s in S} dist(x_i, x_s)``. The exact value is always
taken as :func:`math.fsum` of the per-shot minima, which is correctly rounded
and therefore identical for every code path that arrives at the same subset.

Move deltas are computed from a :class:`NearestCache` holding, for every shot,
its nearest and second-nearest selected shot. For a swap ``out -> in``::

    delta = sum_i [min(d_i,in, d1_i) - d1_i]
          + sum_{i : n1_i = out} [min(d_i,in, d2_i) - min(d_i,in, d1_i)]

which needs no rescan, because a single swap removes at most one of the two
cached facilities of any shot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .instance import Instance, MetricKind, Solution

_SCIPY_METRIC = {
    MetricKind.EUCLIDEAN: "euclidean",
    MetricKind.SQEUCLIDEAN: "sqeuclidean",
    MetricKind.MANHATTAN: "cityblock",
}


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    entries: np.ndarray
    metric: MetricKind = MetricKind.EUCLIDEAN

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]

    @cached_property
    def neighbor_order(self) -> np.ndarray:
        """Row-wise stable argsort: shots by increasing distance, ties by index."""
        return np.argsort(self.entries, axis=1, kind="stable")

    @cached_property
    def neighbor_dist(self) -> np.ndarray:
        return np.take_along_axis(self.entries, self.neighbor_order, axis=1)

    @cached_property
    def rank(self) -> np.ndarray:
        """``rank[i, j]`` = position of ``j`` in row ``i`` of :attr:`neighbor_order`."""
        n = self.n
        rank = np.empty((n, n), dtype=np.intp)
        rank[np.arange(n)[:, None], self.neighbor_order] = np.arange(n)
        return rank


def distance_matrix(instance: Instance) -> DistanceMatrix:
    x = instance.features
    if instance.n == 1:
        entries = np.zeros((1, 1))
    else:
        # condensed form computes each pair once: exact symmetry, zero diagonal
        entries = squareform(pdist(x, metric=_SCIPY_METRIC[instance.metric]))
    entries.setflags(write=False)
    return DistanceMatrix(entries, instance.metric)


def _selected(sol) -> list[int]:
    return list(sol.selected) if isinstance(sol, Solution) else list(sol)


def td_of_minima(minima) -> float:
    return math.fsum(minima)


def total_distance(dm: DistanceMatrix, sol) -> float:
    """Sum over all shots of the distance to the nearest selected shot."""
    sel = _selected(sol)
    if not sel:
        raise ValueError("total distance is undefined for an empty selection")
    return td_of_minima(dm.entries[:, sel].min(axis=1).tolist())


@dataclass
class NearestCache:
    """Nearest / second-nearest selected shot per shot.

    ``nearest2 == -1`` and ``d2 == inf`` where no second facility exists.
    """

    selected: list[int]
    nearest1: np.ndarray
    d1: np.ndarray
    nearest2: np.ndarray
    d2: np.ndarray

    @property
    def td(self) -> float:
        return td_of_minima(self.d1.tolist())

    def copy(self) -> "NearestCache":
        return NearestCache(
            list(self.selected),
            self.nearest1.copy(),
            self.d1.copy(),
            self.nearest2.copy(),
            self.d2.copy(),
        )


def _two_nearest(sub: np.ndarray, cols: np.ndarray):
    """Nearest and second-nearest column per row; argmin keeps the lowest index on ties."""
    rows = np.arange(sub.shape[0])
    first = sub.argmin(axis=1)
    d1 = sub[rows, first]
    if cols.size == 1:
        return cols[first], d1, np.full(rows.size, -1), np.full(rows.size, np.inf)
    masked = sub.copy()
    masked[rows, first] = np.inf
    second = masked.argmin(axis=1)
    return cols[first], d1, cols[second], sub[rows, second]


def build_cache(dm: DistanceMatrix, sol) -> NearestCache:
    sel = sorted(_selected(sol))
    if not sel:
        raise ValueError("cannot build a cache for an empty selection")
    cols = np.asarray(sel)
    nearest1, d1, nearest2, d2 = _two_nearest(dm.entries[:, cols], cols)
    return NearestCache(sel, nearest1, d1, nearest2, d2)


def cache_add(dm: DistanceMatrix, cache: NearestCache, j: int) -> NearestCache:
    """Cache for ``S + {j}`` in O(N)."""
    if j in cache.selected:
        raise ValueError(f"shot {j} is already selected")
    col = dm.entries[:, j]
    # equal distances go to the lower index, as in build_cache
    beats1 = (col < cache.d1) | ((col == cache.d1) & (j < cache.nearest1))
    beats2 = ~beats1 & (
        (col < cache.d2) | ((col == cache.d2) & ((cache.nearest2 < 0) | (j < cache.nearest2)))
    )
    out = cache.copy()
    out.selected = sorted(cache.selected + [j])
    out.nearest2[beats1] = cache.nearest1[beats1]
    out.d2[beats1] = cache.d1[beats1]
    out.nearest1[beats1] = j
    out.d1[beats1] = col[beats1]
    out.nearest2[beats2] = j
    out.d2[beats2] = col[beats2]
    return out


def cache_remove(dm: DistanceMatrix, cache: NearestCache, r: int) -> NearestCache:
    """Cache for ``S - {r}``; only rows that referenced ``r`` are rescanned."""
    if r not in cache.selected:
        raise ValueError(f"shot {r} is not selected")
    if len(cache.selected) == 1:
        raise ValueError("cannot remove the only selected shot")
    out = cache.copy()
    out.selected = [s for s in cache.selected if s != r]
    rows = np.flatnonzero((cache.nearest1 == r) | (cache.nearest2 == r))
    if rows.size:
        cols = np.asarray(out.selected)
        n1, d1, n2, d2 = _two_nearest(dm.entries[np.ix_(rows, cols)], cols)
        out.nearest1[rows], out.d1[rows] = n1, d1
        out.nearest2[rows], out.d2[rows] = n2, d2
    return out


def cache_swap(dm: DistanceMatrix, cache: NearestCache, out: int, incoming: int) -> NearestCache:
    if cache.selected == [out]:
        return build_cache(dm, [incoming])
    return cache_add(dm, cache_remove(dm, cache, out), incoming)


# ---------------------------------------------------------------------------
# budget
# ---------------------------------------------------------------------------


def is_feasible(instance: Instance, indices) -> bool:
    return math.fsum(instance.shots[i].duration_s for i in indices) <= instance.budget_s


def fit_mask(durations: np.ndarray, selected, budget: float, incoming, outgoing=None) -> np.ndarray:
    """Exact feasibility of ``S + in`` (1-D) or ``S - out + in`` (in x out)."""
    t_in = np.asarray(durations[np.asarray(incoming, dtype=int)], dtype=float)
    if outgoing is None:
        return pair_fits(durations, selected, budget, t_in, np.zeros_like(t_in), has_out=False)
    t_out = np.asarray(durations[np.asarray(outgoing, dtype=int)], dtype=float)
    return pair_fits(durations, selected, budget, t_in[:, None], t_out[None, :])


def pair_fits(durations, selected, budget, t_in, t_out, has_out: bool = True) -> np.ndarray:
    """Elementwise exact test ``fsum(S) + t_in - t_out <= budget`` (broadcasting).

    The float shortcut can be off by a few ulps from the fsum of the new
    subset, so entries within rounding distance of the budget are re-decided
    with an exact fsum.
    """
    parts = [float(durations[i]) for i in selected]
    used = math.fsum(parts)
    approx = (used + t_in) - t_out
    mask = np.asarray(approx <= budget)
    scale = used + abs(budget) + float(np.max(t_in, initial=0.0)) + float(np.max(t_out, initial=0.0))
    border = np.abs(approx - budget) <= 1e-12 * scale
    if border.any():
        t_in_b, t_out_b = np.broadcast_arrays(t_in, t_out)
        for idx in zip(*np.nonzero(border)):
            extra = [float(t_in_b[idx])]
            if has_out:
                extra.append(-float(t_out_b[idx]))
            mask[idx] = math.fsum(parts + extra) <= budget
    return mask


# ---------------------------------------------------------------------------
# move deltas
# ---------------------------------------------------------------------------


def add_deltas(dm: DistanceMatrix, cache: NearestCache, candidates) -> np.ndarray:
    """``TD(S + {j}) - TD(S)`` for every ``j`` in ``candidates`` (all <= 0)."""
    cand = np.asarray(candidates, dtype=int)
    if cand.size == 0:
        return np.zeros(0)
    gain = np.minimum(dm.entries[:, cand] - cache.d1[:, None], 0.0)
    return gain.sum(axis=0)


def swap_deltas(dm: DistanceMatrix, cache: NearestCache, outgoing, incoming) -> np.ndarray:
    """Matrix of swap deltas, shape ``(len(incoming), len(outgoing))``."""
    outs = np.asarray(outgoing, dtype=int)
    ins = np.asarray(incoming, dtype=int)
    if outs.size == 0 or ins.size == 0:
        return np.zeros((ins.size, outs.size))
    cols = dm.entries[:, ins]
    d1 = cache.d1[:, None]
    with_in = np.minimum(cols, d1)
    base = (with_in - d1).sum(axis=0)
    # correction for shots whose nearest facility is removed; rows are grouped
    # by owner so each group sum is one reduceat segment
    correction = np.minimum(cols, cache.d2[:, None]) - with_in
    owner = cache.nearest1
    order = np.argsort(owner, kind="stable")
    owners, starts = np.unique(owner[order], return_index=True)
    group_sums = np.add.reduceat(correction[order], starts, axis=0)
    pos = np.searchsorted(owners, outs)
    pos = np.minimum(pos, owners.size - 1)
    hit = owners[pos] == outs
    per_out = np.where(hit[:, None], group_sums[pos], 0.0)
    return base[:, None] + per_out.T


def delta_add(dm: DistanceMatrix, cache: NearestCache, j: int) -> float:
    if j in cache.selected:
        raise ValueError(f"shot {j} is already selected")
    return float(add_deltas(dm, cache, [j])[0])


def delta_swap(dm: DistanceMatrix, cache: NearestCache, out: int, incoming: int) -> float:
    if out not in cache.selected:
        raise ValueError(f"shot {out} is not selected")
    if incoming in cache.selected:
        raise ValueError(f"shot {incoming} is already selected")
    return float(swap_deltas(dm, cache, [out], [incoming])[0, 0])
