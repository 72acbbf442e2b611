"""Exact best-move search over the add / swap neighborhood without dense N x C passes.

Only pairs ``(i, j)`` with ``d(i, j)`` below shot ``i``'s second-nearest
selected distance can change a swap delta beyond the separable part, and in
the row-sorted neighbor lists of :class:`DistanceMatrix` those pairs form a
prefix of each row. Writing

    gain(j)   = sum_i min(0, d(i, j) - d1_i)                     (add delta)
    loss(r)   = sum_{i : n1_i = r} (d2_i - d1_i)                 (removal cost)
    w(r, j)   = sum_{i : n1_i = r, d(i,j) < d2_i} (d2_i - max(d(i, j), d1_i))

a swap ``r -> j`` changes TD by ``gain(j) + loss(r) - w(r, j)``. Pairs with
``w > 0`` are evaluated explicitly; for every other pair the value is
``gain(j) + loss(r)``, whose minimum over the budget-feasible ``r`` is a
prefix minimum once the selected shots are sorted by decreasing duration.
Since ``w >= 0`` the separable value never undercuts a true delta, so the
minimum of both candidate sets is the exact best swap.
"""

from __future__ import annotations

import math

import numpy as np

from .objective import DistanceMatrix, NearestCache, pair_fits, swap_deltas


def _prefix_pairs(dm: DistanceMatrix, depth: np.ndarray):
    """All ``(row, col, dist)`` with ``col`` among the first ``depth[row]`` neighbors."""
    total = int(depth.sum())
    rows = np.repeat(np.arange(depth.size), depth)
    starts = np.cumsum(depth) - depth
    pos = np.arange(total) - np.repeat(starts, depth)
    return rows, dm.neighbor_order[rows, pos], dm.neighbor_dist[rows, pos]


def add_gains(dm: DistanceMatrix, cache: NearestCache) -> np.ndarray:
    """Add delta for every shot (values at selected shots are meaningless)."""
    n = dm.n
    depth = dm.rank[np.arange(n), cache.nearest1]
    rows, cols, dist = _prefix_pairs(dm, depth)
    return np.bincount(cols, weights=dist - cache.d1[rows], minlength=n)


def pick(delta: np.ndarray, incoming: np.ndarray, outgoing: np.ndarray, tol: float) -> int:
    """Index of the minimum delta; values within ``tol`` of it count as tied
    and go to the lowest incoming, then outgoing index."""
    tied = np.flatnonzero(delta <= delta.min() + tol)
    k = np.lexsort((outgoing[tied], incoming[tied]))[0]
    return int(tied[k])


def best_add(dm, durations, budget, cache: NearestCache, candidates: np.ndarray, tol: float = 0.0):
    """``(j, delta)`` of the best feasible add, ``None`` if no add fits at all."""
    fits = pair_fits(durations, cache.selected, budget, durations[candidates], 0.0, has_out=False)
    if not fits.any():
        return None
    cand = candidates[fits]
    gains = add_gains(dm, cache)[cand]
    k = pick(gains, cand, np.zeros_like(cand), tol)
    return int(cand[k]), float(gains[k])


def best_swap(dm, durations, budget, cache: NearestCache, candidates: np.ndarray, tol: float = 0.0):
    """``(j, r, delta)`` of the best feasible swap, or ``None`` if none fits."""
    selected = np.asarray(cache.selected)
    if selected.size == 1:
        fits = pair_fits(durations, cache.selected, budget, durations[candidates], durations[selected[0]])
        if not fits.any():
            return None
        cand = candidates[fits]
        deltas = swap_deltas(dm, cache, selected, cand)[:, 0]
        k = pick(deltas, cand, np.zeros_like(cand), tol)
        return int(cand[k]), int(selected[0]), float(deltas[k])

    n = dm.n
    is_cand = np.zeros(n, dtype=bool)
    is_cand[candidates] = True
    d1, d2, n1 = cache.d1, cache.d2, cache.nearest1

    depth = dm.rank[np.arange(n), cache.nearest2]
    rows, cols, dist = _prefix_pairs(dm, depth)
    keep = is_cand[cols]
    rows, cols, dist = rows[keep], cols[keep], dist[keep]

    below1 = dist < d1[rows]
    gain = np.bincount(cols[below1], weights=dist[below1] - d1[rows[below1]], minlength=n)
    loss = np.bincount(n1, weights=d2 - d1, minlength=n)

    cand_j, cand_r, cand_delta = [], [], []

    # explicitly coupled pairs
    w = d2[rows] - np.maximum(dist, d1[rows])
    pos = w > 0
    if pos.any():
        keys = n1[rows[pos]] * n + cols[pos]
        uniq, inverse = np.unique(keys, return_inverse=True)
        w_sum = np.bincount(inverse, weights=w[pos])
        r_a, j_a = uniq // n, uniq % n
        delta_a = (gain[j_a] + loss[r_a]) - w_sum
        ok = pair_fits(durations, cache.selected, budget, durations[j_a], durations[r_a])
        cand_j.append(j_a[ok])
        cand_r.append(r_a[ok])
        cand_delta.append(delta_a[ok])

    # separable part: per incoming shot, the cheapest feasible removal
    order = selected[np.lexsort((selected, -durations[selected]))]
    t_sorted = durations[order]
    # prefix minimum of (loss, index) pairs via their lexicographic rank
    lex = np.empty(order.size, dtype=np.intp)
    lex[np.lexsort((order, loss[order]))] = np.arange(order.size)
    by_rank = np.empty_like(order)
    by_rank[lex] = order
    best_r = by_rank[np.minimum.accumulate(lex)]
    best_loss = loss[best_r]
    prefix = _feasible_prefix(durations, cache.selected, budget, candidates, t_sorted)
    has = prefix > 0
    if has.any():
        j_b = candidates[has]
        k_b = prefix[has] - 1
        cand_j.append(j_b)
        cand_r.append(best_r[k_b])
        cand_delta.append(gain[j_b] + best_loss[k_b])

    if not cand_j:
        return None
    j_all = np.concatenate(cand_j)
    if j_all.size == 0:
        return None
    r_all = np.concatenate(cand_r)
    delta_all = np.concatenate(cand_delta)
    k = pick(delta_all, j_all, r_all, tol)
    return int(j_all[k]), int(r_all[k]), float(delta_all[k])


def _feasible_prefix(durations, selected, budget, candidates, t_sorted) -> np.ndarray:
    """For each candidate, how many of the duration-descending selected shots it may replace."""
    parts = [float(durations[i]) for i in selected]
    used = math.fsum(parts)
    t_in = durations[candidates]
    need = (used + t_in) - budget  # replaceable iff t_out >= need
    neg = -t_sorted
    scale = used + abs(budget) + float(t_in.max(initial=0.0)) + float(t_sorted.max(initial=0.0))
    eps = 1e-12 * scale
    lo = np.searchsorted(neg, -(need + eps), side="right")
    hi = np.searchsorted(neg, -(need - eps), side="right")
    prefix = lo.copy()
    for c in np.flatnonzero(hi > lo):
        k = lo[c]
        while k < hi[c] and math.fsum(parts + [float(t_in[c]), -float(t_sorted[k])]) <= budget:
            k += 1
        prefix[c] = k
    return prefix
