"""Domain types for knapsack-median shot selection and instance file I/O.

An :class:`Instance` is an ordered list of shots (duration + feature vector),
a duration budget in seconds and a distance metric. A :class:`Solution` is a
non-empty, budget-feasible subset of shot indices.

Duration sums are computed with :func:`math.fsum` everywhere, so the sum of a
subset is the correctly rounded value of the exact real sum and does not
depend on summation order. Feasibility is ``fsum(durations) <= budget`` with
no slack.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed or inconsistent instance data."""


class InfeasibleInstanceError(InstanceError):
    """Raised when no single shot fits into the budget."""


class MetricKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SQEUCLIDEAN = "sqeuclidean"
    MANHATTAN = "manhattan"

    @classmethod
    def parse(cls, value: "str | MetricKind | None") -> "MetricKind":
        if value is None:
            return cls.EUCLIDEAN
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise InstanceError(f"unknown metric {value!r} (expected one of {names})") from None


@dataclass(frozen=True)
class Shot:
    id: str
    duration_s: float
    features: tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.id, str):
            raise InstanceError(f"shot id must be a string, got {self.id!r}")
        if not (isinstance(self.duration_s, (int, float)) and math.isfinite(self.duration_s)):
            raise InstanceError(f"shot {self.id!r}: duration must be a finite number")
        if self.duration_s <= 0:
            raise InstanceError(f"shot {self.id!r}: duration must be positive, got {self.duration_s}")
        if len(self.features) < 1:
            raise InstanceError(f"shot {self.id!r}: empty feature vector")
        if not all(math.isfinite(v) for v in self.features):
            raise InstanceError(f"shot {self.id!r}: non-finite feature value")


@dataclass(frozen=True)
class Instance:
    name: str
    shots: tuple[Shot, ...]
    budget_s: float
    metric: MetricKind = MetricKind.EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "shots", tuple(self.shots))
        object.__setattr__(self, "metric", MetricKind.parse(self.metric))
        if not self.shots:
            raise InstanceError("instance must contain at least one shot")
        ids = [s.id for s in self.shots]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise InstanceError(f"duplicate shot ids: {dup[:5]}")
        dim = len(self.shots[0].features)
        for k, shot in enumerate(self.shots):
            if len(shot.features) != dim:
                raise InstanceError(
                    f"feature dimension mismatch: shot {k} ({shot.id!r}) has "
                    f"{len(shot.features)} features, expected {dim}"
                )
        if not (isinstance(self.budget_s, (int, float)) and math.isfinite(self.budget_s)):
            raise InstanceError("budget must be a finite number")
        if self.budget_s <= 0:
            raise InstanceError(f"budget must be positive, got {self.budget_s}")
        shortest = min(s.duration_s for s in self.shots)
        if shortest > self.budget_s:
            raise InfeasibleInstanceError(
                f"infeasible instance: budget {self.budget_s} s is smaller than the "
                f"shortest shot ({shortest} s)"
            )

    @property
    def n(self) -> int:
        return len(self.shots)

    @property
    def dim(self) -> int:
        return len(self.shots[0].features)

    @cached_property
    def durations(self) -> np.ndarray:
        arr = np.array([s.duration_s for s in self.shots], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def features(self) -> np.ndarray:
        arr = np.array([s.features for s in self.shots], dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def total_duration_s(self) -> float:
        return math.fsum(s.duration_s for s in self.shots)

    def with_budget(self, budget_s: float) -> "Instance":
        return Instance(self.name, self.shots, budget_s, self.metric)

    def with_metric(self, metric: "str | MetricKind") -> "Instance":
        return Instance(self.name, self.shots, self.budget_s, MetricKind.parse(metric))


@dataclass(frozen=True)
class Solution:
    """Feasible subset of shot indices, kept sorted ascending."""

    selected: tuple[int, ...]
    duration_used_s: float

    @classmethod
    def from_indices(cls, instance: Instance, indices: Iterable[int]) -> "Solution":
        idx = [int(i) for i in indices]
        if not idx:
            raise InstanceError("a solution must select at least one shot")
        if len(set(idx)) != len(idx):
            raise InstanceError(f"duplicate shot indices in solution: {sorted(idx)}")
        for i in idx:
            if not 0 <= i < instance.n:
                raise InstanceError(f"shot index {i} out of range for N={instance.n}")
        idx.sort()
        used = math.fsum(instance.shots[i].duration_s for i in idx)
        if used > instance.budget_s:
            raise InstanceError(
                f"infeasible solution: {used} s exceeds budget {instance.budget_s} s"
            )
        return cls(tuple(idx), used)

    @classmethod
    def from_ids(cls, instance: Instance, ids: Iterable[str]) -> "Solution":
        lookup = {s.id: k for k, s in enumerate(instance.shots)}
        try:
            return cls.from_indices(instance, [lookup[i] for i in ids])
        except KeyError as exc:
            raise InstanceError(f"unknown shot id {exc.args[0]!r}") from None

    def __len__(self) -> int:
        return len(self.selected)

    def __contains__(self, index: object) -> bool:
        return index in self.selected


def subset_duration(durations: Sequence[float], indices: Iterable[int]) -> float:
    return math.fsum(durations[i] for i in indices)


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------


def derive_budget(total_video_s: float, ratio: float, cap_s: float | None = None) -> float:
    """Summary-length budget from the video length.

    ``ratio * total_video_s``, or ``min(cap_s, ratio * total_video_s)`` when a
    cap is given (e.g. 15% for SumMe/TVSum, min(240 s, 10%) for long movies).
    """
    if not total_video_s > 0:
        raise ValueError(f"video length must be positive, got {total_video_s}")
    if not 0 < ratio < 1:
        raise ValueError(f"budget ratio must lie in (0, 1), got {ratio}")
    budget = ratio * total_video_s
    if cap_s is not None:
        if not cap_s > 0:
            raise ValueError(f"budget cap must be positive, got {cap_s}")
        budget = min(float(cap_s), budget)
    return budget


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def instance_to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "budget_seconds": instance.budget_s,
        "metric": instance.metric.value,
        "shots": [
            {"id": s.id, "duration_seconds": s.duration_s, "features": list(s.features)}
            for s in instance.shots
        ],
    }


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"{what} must be a number, got {value!r}")
    return float(value)


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be an object")
    for key in ("name", "budget_seconds", "shots"):
        if key not in doc:
            raise InstanceError(f"instance document is missing field {key!r}")
    if not isinstance(doc["shots"], list):
        raise InstanceError("'shots' must be an array")
    shots = []
    for k, raw in enumerate(doc["shots"]):
        if not isinstance(raw, dict):
            raise InstanceError(f"shot {k} must be an object")
        try:
            feats = raw["features"]
            if not isinstance(feats, list):
                raise InstanceError(f"shot {k}: 'features' must be an array")
            shots.append(
                Shot(
                    id=raw["id"],
                    duration_s=_number(raw["duration_seconds"], f"shot {k} duration_seconds"),
                    features=tuple(_number(v, f"shot {k} feature") for v in feats),
                )
            )
        except KeyError as exc:
            raise InstanceError(f"shot {k} is missing field {exc.args[0]!r}") from None
    return Instance(
        name=str(doc["name"]),
        shots=tuple(shots),
        budget_s=_number(doc["budget_seconds"], "budget_seconds"),
        metric=MetricKind.parse(doc.get("metric")),
    )


def save_instance(instance: Instance, path) -> None:
    # json writes floats with repr(), which round-trips bit-exactly
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1) + "\n")


def load_instance(
    path,
    budget_s: float | None = None,
    metric: "str | MetricKind | None" = None,
) -> Instance:
    """Load an instance from a JSON document or a CSV shot table.

    CSV rows are ``id,duration_seconds,f0,f1,...`` (an optional header row is
    skipped); the budget must then be passed explicitly. For JSON files a
    given ``budget_s``/``metric`` overrides the stored value.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read instance file {path}: {exc.strerror}") from None
    if path.suffix.lower() == ".csv":
        if budget_s is None:
            raise InstanceError("CSV instances need an explicit budget")
        return _instance_from_csv(text, path.stem, budget_s, metric)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: parse error: {exc}") from None
    if isinstance(doc, dict):
        if budget_s is not None:
            doc = {**doc, "budget_seconds": budget_s}
        if metric is not None:
            doc = {**doc, "metric": MetricKind.parse(metric).value}
    return instance_from_dict(doc)


def _instance_from_csv(text: str, name: str, budget_s: float, metric) -> Instance:
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if rows:
        try:
            float(rows[0][1])
        except (ValueError, IndexError):
            rows = rows[1:]
    shots = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) < 3:
            raise InstanceError(f"CSV row {lineno}: expected id,duration_seconds,f0,...")
        try:
            values = [float(c) for c in row[1:]]
        except ValueError:
            raise InstanceError(f"CSV row {lineno}: non-numeric value") from None
        shots.append(Shot(row[0].strip(), values[0], tuple(values[1:])))
    return Instance(name, tuple(shots), float(budget_s), MetricKind.parse(metric))
