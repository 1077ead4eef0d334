"""Noise-sensitivity and runtime experiments on synthetic mixture data.

Each category draws from a three-part mixture: a normal core with
probability 0.5, a Cauchy component with probability ``0.5 - p1`` and
uniform noise with probability ``p1``. Five categories are generated; only
``C5`` (shifted up by 60) dominates the rest.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import resampling
from .core import AnalysisConfig, ObservationSet, group_by_category
from .dominance import DECISION_METHODS, DominanceNetwork, infer_network
from .resampling import RngStream

NOISE_GRID = (0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40)


@dataclass(frozen=True)
class MixtureParams:
    mu0: float = 80.0
    sigma0: float = 16.0
    x0: float = 85.0
    gamma: float = 2.0
    L1: float = -400.0
    U1: float = 400.0
    p1: float = 0.01

    def __post_init__(self):
        ok = (
            self.sigma0 > 0
            and self.gamma > 0
            and self.L1 < self.U1
            and 0.0 <= self.p1 <= 0.5
            and all(math.isfinite(v) for v in (self.mu0, self.sigma0, self.x0, self.gamma, self.L1, self.U1))
        )
        if not ok:
            raise ValueError(f"invalid mixture: {self}")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (0.5, 0.5 - self.p1, self.p1)


def sample_mixture(
    params: MixtureParams, n: int, rng: RngStream, return_components: bool = False
):
    """Draw ``n`` values; optionally also the component index (0 normal, 1 Cauchy, 2 uniform)."""
    if n < 1:
        raise ValueError("invalid mixture: n must be at least 1")
    gen = rng.generator()
    pick = gen.random(n)
    comp = np.where(pick < 0.5, 0, np.where(pick < 1.0 - params.p1, 1, 2))
    normal = gen.normal(params.mu0, params.sigma0, n)
    # inverse-CDF Cauchy
    cauchy = params.x0 + params.gamma * np.tan(np.pi * (gen.random(n) - 0.5))
    uniform = gen.uniform(params.L1, params.U1, n)
    x = np.choose(comp, [normal, cauchy, uniform])
    return (x, comp) if return_components else x


@dataclass(frozen=True)
class ScenarioSpec:
    """Five categories: C1..C4 share ``base``, C5 uses ``top``."""

    base: MixtureParams = MixtureParams()
    top: MixtureParams = MixtureParams(mu0=140.0, x0=145.0)
    n_per_category: int = 100

    labels = ("C1", "C2", "C3", "C4", "C5")

    @property
    def truth_edges(self) -> frozenset:
        return frozenset(("C5", c) for c in self.labels[:4])

    @property
    def truth(self) -> DominanceNetwork:
        return DominanceNetwork(self.labels, self.truth_edges)

    def with_noise(self, p1: float) -> "ScenarioSpec":
        return replace(self, base=replace(self.base, p1=p1), top=replace(self.top, p1=p1))

    def params_for(self, label: str) -> MixtureParams:
        return self.top if label == "C5" else self.base


def generate_scenario(spec: ScenarioSpec, rng: RngStream) -> ObservationSet:
    cats, vals = [], []
    for k, label in enumerate(spec.labels):
        x = sample_mixture(spec.params_for(label), spec.n_per_category, rng.derive(k))
        cats += [label] * x.size
        vals.append(x)
    return ObservationSet(tuple(cats), np.concatenate(vals))


def evaluate(predicted: DominanceNetwork, truth) -> tuple[float, float, float]:
    """Precision, recall and F1 of predicted directed edges against ``truth``.

    ``truth`` is a :class:`DominanceNetwork` or a set of edges. When nothing
    is predicted or nothing matches, the undefined ratios are reported as 0.
    """
    if isinstance(truth, DominanceNetwork):
        if set(truth.nodes) != set(predicted.nodes):
            raise ValueError("node set mismatch")
        truth_edges = truth.edges
    else:
        truth_edges = frozenset(tuple(e) for e in truth)
        if not {v for e in truth_edges for v in e} <= set(predicted.nodes):
            raise ValueError("node set mismatch")
    tp = len(predicted.edges & truth_edges)
    fp = len(predicted.edges - truth_edges)
    fn = len(truth_edges - predicted.edges)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass
class BenchmarkReport:
    """Accuracy rows ``(method, p1, precision, recall, f1)`` and timing rows ``(method, n, seconds)``.

    Accuracy rows are means over datasets; ``p1 == "all"`` marks the
    aggregate over the whole noise grid.
    """

    accuracy: list = field(default_factory=list)
    timing: list = field(default_factory=list)
    per_dataset: list = field(default_factory=list, repr=False)

    def aggregate(self, method: str) -> dict:
        for row in self.accuracy:
            if row["method"] == method and row["p1"] == "all":
                return row
        raise KeyError(method)

    def level(self, method: str, p1: float) -> dict:
        for row in self.accuracy:
            if row["method"] == method and row["p1"] == p1:
                return row
        raise KeyError((method, p1))

    def f1_by_level(self, method: str) -> list[tuple[float, float]]:
        return [(r["p1"], r["f1"]) for r in self.accuracy if r["method"] == method and r["p1"] != "all"]

    def to_json(self) -> str:
        return json.dumps({"accuracy": self.accuracy, "timing": self.timing}, indent=2)

    def write_csv(self, dest) -> None:
        """Write accuracy rows, or timing rows if there are none, to a path or open file."""
        if self.accuracy:
            cols = ["method", "p1", "precision", "recall", "f1"]
            rows = self.accuracy
        else:
            cols = ["method", "n", "seconds"]
            rows = self.timing
        if hasattr(dest, "write"):
            self._write_rows(dest, cols, rows)
        else:
            with open(dest, "w", newline="", encoding="utf-8") as fh:
                self._write_rows(fh, cols, rows)

    @staticmethod
    def _write_rows(fh, cols, rows):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r[c]) for c in cols])


def _cell(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _score_dataset(task):
    spec, methods, cfg, level, d = task
    master = RngStream(cfg.seed)
    data = group_by_category(generate_scenario(spec, master.derive(level, d, 0)))
    out = []
    for m in methods:
        net = infer_network(data, cfg, m, master.derive(level, d, 1))
        out.append((m, level, d) + evaluate(net, spec.truth))
    return out


def run_benchmark(
    methods: Iterable[str] = DECISION_METHODS,
    p1_grid: Sequence[float] = NOISE_GRID,
    datasets_per_level: int = 100,
    spec: ScenarioSpec = ScenarioSpec(),
    cfg: AnalysisConfig = AnalysisConfig(),
    n_jobs: Optional[int] = None,
) -> BenchmarkReport:
    """Score every method on ``datasets_per_level`` fresh datasets per noise level.

    Every method sees the same datasets. Per-level and overall rows are
    plain means of per-dataset precision, recall and F1.
    """
    methods = list(methods)
    unknown = [m for m in methods if m not in DECISION_METHODS]
    if unknown:
        raise ValueError(f"unknown method: {unknown[0]!r}")
    tasks = [
        (spec.with_noise(p1), methods, cfg, li, d)
        for li, p1 in enumerate(p1_grid)
        for d in range(datasets_per_level)
    ]
    if n_jobs is None or n_jobs == 1:
        scored = [_score_dataset(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
            scored = list(pool.map(_score_dataset, tasks))
    flat = [row for rows in scored for row in rows]

    report = BenchmarkReport()
    report.per_dataset = [
        {"method": m, "p1": float(p1_grid[li]), "dataset": d, "precision": p, "recall": r, "f1": f}
        for m, li, d, p, r, f in flat
    ]
    for m in methods:
        rows = np.array([(p, r, f) for mm, _, _, p, r, f in flat if mm == m])
        for li, p1 in enumerate(p1_grid):
            lv = np.array([(p, r, f) for mm, l, _, p, r, f in flat if mm == m and l == li])
            report.accuracy.append(_summary(m, float(p1), lv))
        report.accuracy.append(_summary(m, "all", rows))
    return report


def _summary(method, p1, arr: np.ndarray) -> dict:
    p, r, f = arr.mean(axis=0) if arr.size else (0.0, 0.0, 0.0)
    return {"method": method, "p1": p1, "precision": float(p), "recall": float(r), "f1": float(f)}


def timing_benchmark(
    sizes: Sequence[int],
    K: int = 4000,
    seed: int = 0,
    methods: Sequence[str] = ("percentile", "bca"),
    alpha: float = 0.05,
) -> BenchmarkReport:
    """Wall-clock seconds of one ``mean_diff_ci`` call per method and group size.

    Both groups have ``n`` values drawn from the low-noise scenario (C1 and
    C5). Methods at the same size share data and seed.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    spec = ScenarioSpec()
    master = RngStream(seed)
    report = BenchmarkReport()
    for n in sizes:
        p = sample_mixture(spec.base, int(n), master.derive(n, 0))
        q = sample_mixture(spec.top, int(n), master.derive(n, 1))
        for m in methods:
            cfg = AnalysisConfig(alpha, K, m, seed)
            t0 = time.perf_counter()
            resampling.mean_diff_ci(p, q, cfg, master.derive(n, 2))
            report.timing.append(
                {"method": m, "n": int(n), "seconds": time.perf_counter() - t0}
            )
    return report
