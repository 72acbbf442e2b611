"""Random instance families used by the test suite and the experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, MetricKind, Shot


@dataclass(frozen=True)
class RandomFamily:
    """Features i.i.d. uniform on [0, 1], durations uniform on ``duration_range``.

    The budget is ``budget_fraction`` of the total duration (never below the
    shortest shot, so every sampled instance is feasible).
    """

    n_range: tuple[int, int] = (6, 14)
    d_range: tuple[int, int] = (2, 8)
    duration_range: tuple[float, float] = (1.0, 5.0)
    budget_fraction: float = 0.4
    metric: MetricKind = MetricKind.EUCLIDEAN


def random_instance(
    rng: np.random.Generator,
    n: int,
    d: int,
    duration_range=(1.0, 5.0),
    budget_fraction: float = 0.4,
    metric: MetricKind = MetricKind.EUCLIDEAN,
    name: str = "random",
) -> Instance:
    features = rng.uniform(0.0, 1.0, size=(n, d))
    durations = rng.uniform(*duration_range, size=n)
    shots = tuple(
        Shot(f"s{k}", float(durations[k]), tuple(float(v) for v in features[k])) for k in range(n)
    )
    budget = max(budget_fraction * float(np.sum(durations)), float(durations.min()))
    return Instance(name, shots, budget, metric)


def sample_family(seed: int, count: int, family: RandomFamily | None = None) -> list[Instance]:
    family = family or RandomFamily()
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(family.n_range[0], family.n_range[1] + 1))
        d = int(rng.integers(family.d_range[0], family.d_range[1] + 1))
        out.append(
            random_instance(
                rng, n, d, family.duration_range, family.budget_fraction, family.metric, f"rand{k:04d}"
            )
        )
    return out
