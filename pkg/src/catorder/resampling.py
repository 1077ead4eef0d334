"""Bootstrap replicates of means and mean differences, and the intervals built on them.

Three interval constructions are available: percentile, BCa and normal. All
randomness comes from an :class:`RngStream`, so each result is a pure function
of its inputs plus ``(seed, stream_id)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .core import AnalysisConfig, ConfidenceInterval, DataError, as_finite_vector

SMALL_GROUP = 5
# Upper bound on the number of resampled indices held in memory at once.
_CHUNK_ELEMENTS = 1 << 22


class SmallSampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Every call to :meth:`generator` returns a fresh generator positioned at the
    start of the same sequence, so results never depend on which thread or
    worker consumed the stream.
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = int(getattr(self, name))
            if not 0 <= v < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer")
            object.__setattr__(self, name, v)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def derive(self, *keys: int) -> "RngStream":
        """Child stream for a sub-task, keyed by non-negative integers."""
        words = [self.stream_id & 0xFFFFFFFF, self.stream_id >> 32]
        for k in keys:
            k = int(k)
            words += [k & 0xFFFFFFFF, k >> 32]
        sid = np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0]
        return RngStream(self.seed, int(sid))


@dataclass(frozen=True)
class ReplicateSet:
    replicates: np.ndarray = field(repr=False)
    source_stat: float
    kind: str  # "mean" or "mean_diff"

    def __post_init__(self):
        r = np.asarray(self.replicates, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "replicates", r)

    def __len__(self) -> int:
        return self.replicates.size


def _warn_small(values: np.ndarray, name: str) -> None:
    if values.size < SMALL_GROUP:
        warnings.warn(
            f"{name} has only {values.size} observations; bootstrap intervals "
            "may be unreliable",
            SmallSampleWarning,
            stacklevel=3,
        )


def _resample_means(values: np.ndarray, K: int, gen: np.random.Generator) -> np.ndarray:
    n = values.size
    out = np.empty(K)
    step = max(1, _CHUNK_ELEMENTS // n)
    for start in range(0, K, step):
        stop = min(K, start + step)
        idx = gen.integers(0, n, size=(stop - start, n))
        out[start:stop] = values[idx].mean(axis=1)
    return out


def _check_reps(K: int) -> int:
    if int(K) != K or K < 1:
        raise ValueError(f"replicate count must be a positive integer, got {K}")
    return int(K)


def bootstrap_mean(values: Sequence[float], K: int, rng: RngStream) -> ReplicateSet:
    """K bootstrap means, each over ``len(values)`` draws with replacement."""
    v = as_finite_vector(values, "values")
    K = _check_reps(K)
    _warn_small(v, "sample")
    reps = _resample_means(v, K, rng.generator())
    return ReplicateSet(reps, float(v.mean()), "mean")


def bootstrap_mean_diff(
    values_p: Sequence[float], values_q: Sequence[float], K: int, rng: RngStream
) -> ReplicateSet:
    """K replicates of ``mean(q*) - mean(p*)``, each side resampled independently."""
    p = as_finite_vector(values_p, "values_p")
    q = as_finite_vector(values_q, "values_q")
    K = _check_reps(K)
    _warn_small(p, "values_p")
    _warn_small(q, "values_q")
    gen = rng.generator()
    means_p = _resample_means(p, K, gen)
    means_q = _resample_means(q, K, gen)
    return ReplicateSet(means_q - means_p, float(q.mean() - p.mean()), "mean_diff")


def _require_two(reps: ReplicateSet) -> np.ndarray:
    if len(reps) < 2:
        raise DataError("insufficient replicates: need at least 2")
    return reps.replicates


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _quantiles(r: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    # type 7: linear interpolation at rank 1 + (K - 1) q
    ql, qu = np.quantile(r, [lo, hi], method="linear")
    return float(ql), float(qu)


def percentile_ci(reps: ReplicateSet, alpha: float) -> ConfidenceInterval:
    r = _require_two(reps)
    alpha = _check_alpha(alpha)
    lo, hi = _quantiles(r, alpha / 2, 1 - alpha / 2)
    return ConfidenceInterval(lo, hi, 1 - alpha, "percentile", reps.source_stat)


def normal_ci(reps: ReplicateSet, alpha: float) -> ConfidenceInterval:
    """Replicate mean plus or minus ``z * sd(replicates)``.

    The replicates are already bootstrap means, so their spread is the
    standard error; there is no further division by sqrt(K).
    """
    r = _require_two(reps)
    alpha = _check_alpha(alpha)
    center = float(r.mean())
    half = float(ndtri(1 - alpha / 2) * r.std(ddof=1))
    return ConfidenceInterval(
        center - half, center + half, 1 - alpha, "normal", reps.source_stat
    )


def _jackknife(values: np.ndarray, statistic: Callable[[np.ndarray], float]) -> np.ndarray:
    # Generic leave-one-out recomputation; costs O(n^2) for an O(n) statistic.
    n = values.size
    out = np.empty(n)
    for i in range(n):
        out[i] = statistic(np.delete(values, i))
    return out


def jackknife_values(original, kind: str) -> np.ndarray:
    """Leave-one-out statistics for a mean or a two-sample mean difference.

    For a mean difference the observations of each sample are deleted in
    turn while the other sample is held fixed.
    """
    if kind == "mean":
        v = as_finite_vector(original, "original")
        return _jackknife(v, np.mean)
    if kind == "mean_diff":
        p, q = original
        p = as_finite_vector(p, "values_p")
        q = as_finite_vector(q, "values_q")
        mp, mq = p.mean(), q.mean()
        drop_p = mq - _jackknife(p, np.mean) if p.size > 1 else np.empty(0)
        drop_q = _jackknife(q, np.mean) - mp if q.size > 1 else np.empty(0)
        return np.concatenate([drop_p, drop_q])
    raise ValueError(f"unknown replicate kind: {kind!r}")


def acceleration(jack: np.ndarray) -> float:
    """Jackknife acceleration, or NaN when every jackknife value is equal."""
    d = jack.mean() - jack
    den = float(np.sum(d**2))
    if jack.size < 2 or den == 0.0:
        return float("nan")
    return float(np.sum(d**3) / (6.0 * den**1.5))


def bias_correction(reps: ReplicateSet) -> float:
    r = reps.replicates
    K = r.size
    prop = np.count_nonzero(r < reps.source_stat) / K
    prop = min(max(prop, 1.0 / (K + 1)), K / (K + 1.0))
    return float(ndtri(prop))


def bca_ci(original, reps: ReplicateSet, alpha: float) -> ConfidenceInterval:
    """Bias-corrected and accelerated interval.

    ``original`` is the sample the replicates were drawn from, or the pair
    ``(values_p, values_q)`` for a mean-difference replicate set. Degenerate
    inputs (constant replicates or constant jackknife values) fall back to
    the percentile interval with ``fallback=True``.
    """
    r = _require_two(reps)
    alpha = _check_alpha(alpha)
    sizes = [len(original)] if reps.kind == "mean" else [len(s) for s in original]
    if sum(sizes) < 2:
        raise DataError("insufficient sample: BCa needs at least 2 observations")

    a = acceleration(jackknife_values(original, reps.kind))
    if np.all(r == r[0]) or not np.isfinite(a):
        ci = percentile_ci(reps, alpha)
        return ConfidenceInterval(
            ci.lower, ci.upper, ci.level, "bca", ci.point_estimate, fallback=True
        )

    z0 = bias_correction(reps)
    if z0 == 0.0 and a == 0.0:
        lo, hi = alpha / 2, 1 - alpha / 2
    else:
        z_lo = ndtri(alpha / 2)
        z_hi = -z_lo
        lo = float(ndtr(z0 + (z0 + z_lo) / (1 - a * (z0 + z_lo))))
        hi = float(ndtr(z0 + (z0 + z_hi) / (1 - a * (z0 + z_hi))))
    lower, upper = _quantiles(r, lo, hi)
    return ConfidenceInterval(lower, upper, 1 - alpha, "bca", reps.source_stat)


def interval(original, reps: ReplicateSet, alpha: float, method: str) -> ConfidenceInterval:
    if method == "percentile":
        return percentile_ci(reps, alpha)
    if method == "normal":
        return normal_ci(reps, alpha)
    if method == "bca":
        return bca_ci(original, reps, alpha)
    raise ValueError(f"unknown CI method: {method!r}")


def mean_ci(
    values: Sequence[float], cfg: AnalysisConfig, rng: RngStream
) -> tuple[ReplicateSet, ConfidenceInterval]:
    v = as_finite_vector(values, "values")
    reps = bootstrap_mean(v, cfg.reps, rng)
    return reps, interval(v, reps, cfg.alpha, cfg.ci_method)


def mean_diff_ci(
    values_p: Sequence[float],
    values_q: Sequence[float],
    cfg: AnalysisConfig,
    rng: RngStream,
) -> tuple[ReplicateSet, ConfidenceInterval]:
    """Interval for ``mean(q) - mean(p)``, i.e. higher-sorted minus lower-sorted."""
    p = as_finite_vector(values_p, "values_p")
    q = as_finite_vector(values_q, "values_q")
    reps = bootstrap_mean_diff(p, q, cfg.reps, rng)
    return reps, interval((p, q), reps, cfg.alpha, cfg.ci_method)
