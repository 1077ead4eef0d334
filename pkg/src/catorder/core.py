"""Shared data model: observations, grouped samples, configuration and intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CI_METHODS = ("percentile", "bca", "normal")


class DataError(ValueError):
    """Raised when input data cannot be analyzed (empty, non-finite, malformed)."""


@dataclass(frozen=True)
class ObservationSet:
    """Raw ``(category, value)`` records.

    Labels are stripped of surrounding whitespace but otherwise compared
    case-sensitively. Every value must be finite.
    """

    categories: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(str(c).strip() for c in self.categories)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(labels) == 0 or values.size == 0:
            raise DataError("empty dataset")
        if len(labels) != values.size:
            raise DataError(
                f"length mismatch: {len(labels)} categories vs {values.size} values"
            )
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DataError(f"invalid value at row {int(bad[0])}: {values[bad[0]]!r}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "categories", labels)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, float]]) -> "ObservationSet":
        records = list(records)
        if not records:
            raise DataError("empty dataset")
        cats, vals = zip(*records)
        return cls(tuple(cats), np.asarray(vals, dtype=float))

    def __len__(self) -> int:
        return self.values.size

    @property
    def records(self) -> list[tuple[str, float]]:
        return list(zip(self.categories, self.values.tolist()))

    @property
    def labels(self) -> list[str]:
        return sorted(set(self.categories))


@dataclass(frozen=True)
class GroupedData:
    """Per-category value vectors, ordered by ascending sample mean.

    Ties in the mean are broken by the category label so the order is fully
    deterministic.
    """

    labels: tuple[str, ...]
    groups: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.labels) != len(self.groups):
            raise DataError("labels and groups differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise DataError("duplicate category labels")
        for label, g in zip(self.labels, self.groups):
            if np.asarray(g).size == 0:
                raise DataError(f"category {label!r} has no observations")

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label: str) -> np.ndarray:
        try:
            return self.groups[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"unknown category: {label!r}") from None

    @property
    def means(self) -> np.ndarray:
        return np.array([g.mean() for g in self.groups])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.groups])

    def items(self):
        return zip(self.labels, self.groups)


def group_by_category(obs: ObservationSet) -> GroupedData:
    """Partition observations by category and sort groups by sample mean."""
    cats = np.asarray(obs.categories, dtype=object)
    buckets = {}
    for label in sorted(set(obs.categories)):
        g = obs.values[cats == label].copy()
        g.setflags(write=False)
        buckets[label] = g
    order = sorted(buckets, key=lambda lab: (float(buckets[lab].mean()), lab))
    return GroupedData(tuple(order), tuple(buckets[lab] for lab in order))


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.05
    reps: int = 1000
    ci_method: str = "percentile"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be a positive integer, got {self.reps}")
        if self.ci_method not in CI_METHODS:
            raise ValueError(
                f"ci_method must be one of {CI_METHODS}, got {self.ci_method!r}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class ConfidenceInterval:
    """Interval estimate of a mean or a mean difference.

    ``fallback`` is set when a BCa interval degenerated and the percentile
    interval was returned instead.
    """

    lower: float
    upper: float
    level: float
    method: str
    point_estimate: float
    fallback: bool = False

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"lower ({self.lower}) exceeds upper ({self.upper})")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "level": float(self.level),
            "method": self.method,
            "point_estimate": float(self.point_estimate),
            "fallback": bool(self.fallback),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConfidenceInterval":
        return cls(
            lower=float(d["lower"]),
            upper=float(d["upper"]),
            level=float(d["level"]),
            method=str(d["method"]),
            point_estimate=float(d["point_estimate"]),
            fallback=bool(d.get("fallback", False)),
        )


def as_finite_vector(values: Sequence[float], name: str = "sample") -> np.ndarray:
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise DataError(f"empty sample: {name}")
    if not np.all(np.isfinite(v)):
        raise DataError(f"invalid value in {name}")
    return v


def fsig(x: float, digits: int = 15) -> str:
    """Format ``x`` with a fixed number of significant digits."""
    if math.isnan(x):
        return "nan"
    return format(float(x), f".{digits}g")
