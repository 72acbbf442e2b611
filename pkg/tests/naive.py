"""Slow, obviously-correct reference computations used as test oracles."""

import itertools
import math


def dist(instance, i, j):
    a, b = instance.shots[i].features, instance.shots[j].features
    metric = instance.metric.value
    if metric == "euclidean":
        return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
    if metric == "sqeuclidean":
        return math.fsum((x - y) ** 2 for x, y in zip(a, b))
    return math.fsum(abs(x - y) for x, y in zip(a, b))


def td(instance, selected):
    return math.fsum(min(dist(instance, i, s) for s in selected) for i in range(instance.n))


def fits(instance, selected):
    return math.fsum(instance.shots[i].duration_s for i in selected) <= instance.budget_s


def neighborhood(instance, selected):
    """Every feasible add and single swap as ``(kind, incoming, outgoing, new_set)``."""
    selected = sorted(selected)
    others = [j for j in range(instance.n) if j not in selected]
    for j in others:
        new = sorted(selected + [j])
        if fits(instance, new):
            yield "add", j, None, new
    for r in selected:
        for j in others:
            new = sorted([s for s in selected if s != r] + [j])
            if fits(instance, new):
                yield "swap", j, r, new


def optimum(instance):
    best = math.inf
    for k in range(1, instance.n + 1):
        for subset in itertools.combinations(range(instance.n), k):
            if fits(instance, subset):
                best = min(best, td(instance, subset))
    return best
