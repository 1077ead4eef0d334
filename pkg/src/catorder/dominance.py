"""Dominance networks: which categories dominate which, with interval reports.

Pairs are always oriented by the mean ordering of :class:`GroupedData`. Edges
run from the higher-mean category (the dominator) to the lower one, so every
network is acyclic by construction.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from itertools import combinations
from typing import Optional

import numpy as np

from . import resampling, significance
from .core import AnalysisConfig, ConfidenceInterval, DataError, GroupedData
from .resampling import RngStream

DECISION_METHODS = ("mann_whitney_by", "welch_t_by", "pooled_t", "bca_lower", "perc_lower")


@dataclass(frozen=True)
class DominanceNetwork:
    nodes: tuple[str, ...]
    edges: frozenset = frozenset()  # (dominator, dominated)
    alpha: float = 0.05

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node labels")
        edges = frozenset(tuple(e) for e in self.edges)
        known = set(nodes)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on {i!r}")
            if i not in known or j not in known:
                raise ValueError(f"edge ({i!r}, {j!r}) references an unknown category")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    def successors(self, node: str) -> list[str]:
        return sorted(j for i, j in self.edges if i == node)

    def topological_order(self) -> list[str]:
        """Dominators first. Raises ``graphlib.CycleError`` on a cycle."""
        ts = TopologicalSorter({n: [] for n in self.nodes})
        for i, j in self.edges:
            ts.add(j, i)
        return list(ts.static_order())

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except CycleError:
            return False
        return True

    def density(self) -> float:
        return network_density(self)

    def dominated_set(self, node: str) -> set[str]:
        return dominated_set(self, node)

    def sorted_edges(self) -> list[tuple[str, str]]:
        rank = {n: k for k, n in enumerate(self.nodes)}
        return sorted(self.edges, key=lambda e: (-rank[e[0]], -rank[e[1]]))


def network_density(net: DominanceNetwork) -> float:
    """Edge count over C(n, 2), the most edges a mean-sorted DAG can hold."""
    n = len(net.nodes)
    if n < 2:
        raise ValueError("undefined density: need at least 2 nodes")
    return len(net.edges) / (n * (n - 1) / 2)


def dominated_set(net: DominanceNetwork, node: str) -> set[str]:
    """All categories reachable from ``node`` along dominance edges."""
    if node not in net.nodes:
        raise KeyError(f"unknown category: {node!r}")
    adj: dict[str, list[str]] = {n: [] for n in net.nodes}
    for i, j in net.edges:
        adj[i].append(j)
    seen: set[str] = set()
    stack = list(adj[node])
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(adj[v])
    return seen


def check_lower_bound_rule(diff_ci: ConfidenceInterval) -> bool:
    """True iff a higher-minus-lower difference interval lies strictly above zero."""
    return diff_ci.lower > 0.0


@dataclass(frozen=True)
class PairResult:
    low: str
    high: str
    diff_ci: ConfidenceInterval
    p_raw: float
    p_adjusted: float
    dominates: bool

    def to_dict(self) -> dict:
        return {
            "low_category": self.low,
            "high_category": self.high,
            "diff_ci": self.diff_ci.to_dict(),
            "p_raw": float(self.p_raw),
            "p_adjusted": float(self.p_adjusted),
            "dominates": bool(self.dominates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairResult":
        return cls(
            low=d["low_category"],
            high=d["high_category"],
            diff_ci=ConfidenceInterval.from_dict(d["diff_ci"]),
            p_raw=float(d["p_raw"]),
            p_adjusted=float(d["p_adjusted"]),
            dominates=bool(d["dominates"]),
        )


@dataclass(frozen=True)
class DominanceResult:
    """Full analysis output: mean order, intervals, tests and the network."""

    order: tuple[str, ...]
    means: tuple[float, ...]
    sizes: tuple[int, ...]
    mean_cis: dict = field(repr=False)
    pairs: tuple[PairResult, ...] = field(repr=False)
    network: DominanceNetwork = field(repr=False)
    density: float
    config: AnalysisConfig

    def pair(self, low: str, high: str) -> PairResult:
        for pr in self.pairs:
            if pr.low == low and pr.high == high:
                return pr
        raise KeyError(f"no pair ({low!r}, {high!r})")

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {
                "alpha": cfg.alpha,
                "reps": cfg.reps,
                "method": cfg.ci_method,
                "seed": cfg.seed,
            },
            "order": [
                {"category": c, "n": int(n), "mean": float(m)}
                for c, n, m in zip(self.order, self.sizes, self.means)
            ],
            "mean_cis": {c: self.mean_cis[c].to_dict() for c in self.order},
            "pairs": [pr.to_dict() for pr in self.pairs],
            "edges": [list(e) for e in self.network.sorted_edges()],
            "density": float(self.density),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DominanceResult":
        c = d["config"]
        cfg = AnalysisConfig(
            alpha=float(c["alpha"]), reps=int(c["reps"]), ci_method=c["method"], seed=int(c["seed"])
        )
        order = tuple(o["category"] for o in d["order"])
        return cls(
            order=order,
            means=tuple(float(o["mean"]) for o in d["order"]),
            sizes=tuple(int(o["n"]) for o in d["order"]),
            mean_cis={k: ConfidenceInterval.from_dict(v) for k, v in d["mean_cis"].items()},
            pairs=tuple(PairResult.from_dict(p) for p in d["pairs"]),
            network=DominanceNetwork(order, frozenset(tuple(e) for e in d["edges"]), cfg.alpha),
            density=float(d["density"]),
            config=cfg,
        )


def _pairs(data: GroupedData) -> list[tuple[int, int]]:
    return list(combinations(range(len(data)), 2))


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
        return list(pool.map(fn, items))


def _require_two_groups(data: GroupedData) -> None:
    if len(data) < 2:
        raise DataError("nothing to order: need at least 2 categories")


def _test_p_values(data: GroupedData, test) -> np.ndarray:
    return np.array(
        [test(data.groups[a], data.groups[b]).p_value for a, b in _pairs(data)]
    )


def infer_network(
    data: GroupedData,
    cfg: AnalysisConfig = AnalysisConfig(),
    method: str = "mann_whitney_by",
    rng: Optional[RngStream] = None,
) -> DominanceNetwork:
    """Dominance network decided by one of ``DECISION_METHODS``.

    ``*_by`` methods adjust p-values jointly over all pairs; ``pooled_t`` uses
    raw p-values; ``bca_lower`` and ``perc_lower`` assert dominance when the
    difference interval lies above zero.
    """
    _require_two_groups(data)
    pairs = _pairs(data)
    if method == "mann_whitney_by":
        hits = significance.adjust_benjamini_yekutieli(
            _test_p_values(data, significance.mann_whitney_one_sided)
        ) < cfg.alpha
    elif method == "welch_t_by":
        hits = significance.adjust_benjamini_yekutieli(
            _test_p_values(data, significance.welch_t_one_sided)
        ) < cfg.alpha
    elif method == "pooled_t":
        hits = _test_p_values(data, significance.pooled_t_one_sided) < cfg.alpha
    elif method in ("bca_lower", "perc_lower"):
        ci_cfg = AnalysisConfig(
            cfg.alpha, cfg.reps, "bca" if method == "bca_lower" else "percentile", cfg.seed
        )
        rng = rng or RngStream(cfg.seed)
        hits = [
            check_lower_bound_rule(
                resampling.mean_diff_ci(
                    data.groups[a], data.groups[b], ci_cfg, rng.derive(len(data) + k)
                )[1]
            )
            for k, (a, b) in enumerate(pairs)
        ]
    else:
        raise ValueError(f"unknown method: {method!r}")
    labels = data.labels
    edges = frozenset((labels[b], labels[a]) for (a, b), hit in zip(pairs, hits) if hit)
    return DominanceNetwork(labels, edges, cfg.alpha)


def infer_dominance(
    data: GroupedData,
    cfg: AnalysisConfig = AnalysisConfig(),
    rng: Optional[RngStream] = None,
    n_jobs: Optional[int] = None,
) -> DominanceResult:
    """Run the full pipeline on mean-sorted groups.

    Per category: a bootstrap interval of the mean. Per pair (low, high):
    a bootstrap interval of ``mean(high) - mean(low)``, a one-sided
    Mann-Whitney p-value and its Benjamini-Yekutieli adjustment over all
    pairs. ``high`` dominates ``low`` iff the adjusted p-value is below
    ``cfg.alpha``. Each task draws from its own derived stream, so the result
    does not depend on ``n_jobs``.
    """
    _require_two_groups(data)
    rng = rng or RngStream(cfg.seed)
    labels = data.labels
    pairs = _pairs(data)
    C = len(data)

    mean_cis = _map(
        lambda i: resampling.mean_ci(data.groups[i], cfg, rng.derive(i))[1], range(C), n_jobs
    )

    def pair_task(k):
        a, b = pairs[k]
        ci = resampling.mean_diff_ci(data.groups[a], data.groups[b], cfg, rng.derive(C + k))[1]
        test = significance.mann_whitney_one_sided(
            data.groups[a], data.groups[b], (labels[a], labels[b])
        )
        return ci, test.p_value

    done = _map(pair_task, range(len(pairs)), n_jobs)
    raw = np.array([p for _, p in done])
    adj = significance.adjust_benjamini_yekutieli(raw)
    results = tuple(
        PairResult(
            labels[a], labels[b], ci, float(p), float(q), bool(q < cfg.alpha)
        )
        for (a, b), (ci, p), q in zip(pairs, done, adj)
    )
    net = DominanceNetwork(
        labels, frozenset((r.high, r.low) for r in results if r.dominates), cfg.alpha
    )
    return DominanceResult(
        order=labels,
        means=tuple(float(m) for m in data.means),
        sizes=tuple(int(s) for s in data.sizes),
        mean_cis=dict(zip(labels, mean_cis)),
        pairs=results,
        network=net,
        density=network_density(net),
        config=cfg,
    )
