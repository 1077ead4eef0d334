"""One-sided pairwise tests and Benjamini-Yekutieli p-value adjustment.

Every test asks whether ``y`` tends to exceed ``x``. Callers orient pairs so
that ``y`` is the group with the higher sample mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import ndtr

from .core import DataError, as_finite_vector

EXACT_MAX_N = 12


@dataclass(frozen=True)
class PairTestResult:
    statistic: float
    p_value: float
    method: str
    pair: Optional[tuple[str, str]] = None  # (lower-mean label, higher-mean label)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of range: {self.p_value}")


@lru_cache(maxsize=None)
def _u_counts(m: int, n: int) -> tuple[int, ...]:
    """Number of rank arrangements giving each U in 0..m*n (no ties)."""
    if m == 0 or n == 0:
        return (1,)
    # f(m, n, u) = f(m-1, n, u-n) + f(m, n-1, u)
    a = _u_counts(m - 1, n)
    b = _u_counts(m, n - 1)
    out = [0] * (m * n + 1)
    for u, c in enumerate(a):
        out[u + n] += c
    for u, c in enumerate(b):
        out[u] += c
    return tuple(out)


def mann_whitney_u(x: np.ndarray, y: np.ndarray) -> float:
    """U statistic of ``y``: pairs with ``y > x`` plus half the ties."""
    ranks = stats.rankdata(np.concatenate([x, y]))
    ny = y.size
    return float(ranks[x.size :].sum() - ny * (ny + 1) / 2.0)


def mann_whitney_one_sided(
    x: Sequence[float], y: Sequence[float], pair: Optional[tuple[str, str]] = None
) -> PairTestResult:
    """Mann-Whitney test of the alternative "y tends to exceed x".

    Uses the exact null distribution of U when the samples hold at most
    ``EXACT_MAX_N`` values in total and contain no ties; otherwise the normal
    approximation with midrank tie correction and a 0.5 continuity correction.
    """
    x = as_finite_vector(x, "x")
    y = as_finite_vector(y, "y")
    nx, ny = x.size, y.size
    u = mann_whitney_u(x, y)
    pooled = np.concatenate([x, y])
    ties = np.unique(pooled).size < pooled.size

    if nx + ny <= EXACT_MAX_N and not ties:
        counts = _u_counts(nx, ny)
        k = int(round(u))
        p = sum(counts[k:]) / math.comb(nx + ny, nx)
        return PairTestResult(u, min(1.0, p), "mann_whitney", pair)

    n = nx + ny
    _, t = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(t**3 - t)) / (n * (n - 1)) if n > 1 else 0.0
    var = nx * ny / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        return PairTestResult(u, 1.0, "mann_whitney", pair)
    z = (u - nx * ny / 2.0 - 0.5) / math.sqrt(var)
    return PairTestResult(u, float(ndtr(-z)), "mann_whitney", pair)


def _t_result(diff, se, df, method, pair) -> PairTestResult:
    if se == 0.0:
        if diff == 0.0:
            return PairTestResult(0.0, 0.5, method, pair)
        return PairTestResult(math.copysign(math.inf, diff), 0.0 if diff > 0 else 1.0, method, pair)
    t = diff / se
    return PairTestResult(float(t), float(stats.t.sf(t, df)), method, pair)


def _two_or_more(v, name):
    v = as_finite_vector(v, name)
    if v.size < 2:
        raise DataError(f"insufficient sample: {name} needs at least 2 values")
    return v


def welch_t_one_sided(
    x: Sequence[float], y: Sequence[float], pair: Optional[tuple[str, str]] = None
) -> PairTestResult:
    """Welch t-test of ``mean(y) > mean(x)`` with Welch-Satterthwaite df."""
    x = _two_or_more(x, "x")
    y = _two_or_more(y, "y")
    vx = x.var(ddof=1) / x.size
    vy = y.var(ddof=1) / y.size
    se = math.sqrt(vx + vy)
    df = (vx + vy) ** 2 / (vx**2 / (x.size - 1) + vy**2 / (y.size - 1)) if se else 1.0
    return _t_result(float(y.mean() - x.mean()), se, df, "welch_t", pair)


def pooled_t_one_sided(
    x: Sequence[float], y: Sequence[float], pair: Optional[tuple[str, str]] = None
) -> PairTestResult:
    """Student t-test of ``mean(y) > mean(x)`` with pooled variance."""
    x = _two_or_more(x, "x")
    y = _two_or_more(y, "y")
    df = x.size + y.size - 2
    sp2 = ((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1)) / df
    se = math.sqrt(sp2 * (1.0 / x.size + 1.0 / y.size))
    return _t_result(float(y.mean() - x.mean()), se, df, "pooled_t", pair)


def adjust_benjamini_yekutieli(p_values: Sequence[float]) -> np.ndarray:
    """Benjamini-Yekutieli step-up adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=float).reshape(-1)
    m = p.size
    if m == 0:
        return np.empty(0)
    bad = np.flatnonzero(~((p >= 0.0) & (p <= 1.0)))
    if bad.size:
        raise ValueError(f"invalid p-value at index {int(bad[0])}: {p[bad[0]]!r}")
    c_m = np.sum(1.0 / np.arange(1, m + 1))
    order = np.argsort(p, kind="stable")
    ranks = np.arange(1, m + 1)
    scaled = c_m * m * p[order] / ranks
    scaled = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(scaled, 1.0)
    return out
