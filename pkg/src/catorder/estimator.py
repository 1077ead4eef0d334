"""scikit-learn style front end for dominance ordering."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_categories, check_category_values
from .core import AnalysisConfig, group_by_category
from .dominance import DominanceResult, infer_dominance
from .resampling import RngStream


class DominanceOrdering(TransformerMixin, BaseEstimator):
    """Infer which categories dominate which from ``(category, value)`` data.

    Parameters
    ----------
    alpha : float, default=0.05
        Significance level for the pairwise tests and interval level ``1 - alpha``.
    reps : int, default=1000
        Bootstrap replicates per interval.
    ci_method : {"percentile", "bca", "normal"}, default="percentile"
    seed : int, default=0
        Master seed; the fit is a deterministic function of the data and seed.
    n_jobs : int or None, default=None
        Threads used for per-category and per-pair work. Does not change results.

    Attributes
    ----------
    categories_ : ndarray of str
        Categories in ascending order of sample mean.
    means_ : ndarray
    mean_cis_ : dict
        Category label to :class:`~catorder.core.ConfidenceInterval`.
    network_ : DominanceNetwork
    density_ : float
    result_ : DominanceResult

    Examples
    --------
    >>> est = DominanceOrdering(reps=200).fit(["a", "a", "b", "b"], [1, 2, 9, 10])
    >>> list(est.categories_)
    ['a', 'b']
    """

    def __init__(self, alpha=0.05, reps=1000, ci_method="percentile", seed=0, n_jobs=None):
        self.alpha = alpha
        self.reps = reps
        self.ci_method = ci_method
        self.seed = seed
        self.n_jobs = n_jobs

    def _config(self) -> AnalysisConfig:
        return AnalysisConfig(self.alpha, self.reps, self.ci_method, self.seed)

    def fit(self, X, y=None):
        """Fit on category labels ``X`` and values ``y``, or on ``(n, 2)`` rows ``X``."""
        cfg = self._config()
        data = group_by_category(check_category_values(X, y))
        res = infer_dominance(data, cfg, RngStream(cfg.seed), n_jobs=self.n_jobs)
        self.result_ = res
        self.categories_ = np.array(res.order, dtype=object)
        self.means_ = np.array(res.means)
        self.mean_cis_ = dict(res.mean_cis)
        self.network_ = res.network
        self.density_ = res.density
        return self

    def _lookup(self, X) -> np.ndarray:
        check_is_fitted(self, "result_")
        labels = check_categories(X)
        index = {c: i for i, c in enumerate(self.result_.order)}
        unknown = [c for c in labels if c not in index]
        if unknown:
            raise KeyError(f"unknown category: {unknown[0]!r}")
        return np.array([index[c] for c in labels], dtype=int)

    def predict(self, X) -> np.ndarray:
        """Fitted sample mean of each label in ``X``."""
        idx = self._lookup(X)
        return self.means_[idx]

    def transform(self, X) -> np.ndarray:
        """Number of categories dominated (directly or transitively) by each label in ``X``."""
        idx = self._lookup(X)
        counts = np.array(
            [len(self.network_.dominated_set(c)) for c in self.result_.order], dtype=int
        )
        return counts[idx].reshape(-1, 1)

    def fit_transform(self, X, y=None, **fit_params):
        self.fit(X, y)
        if y is None:
            return self.transform(np.asarray(X, dtype=object)[:, 0])
        return self.transform(X)

    def dominates(self, a: str, b: str) -> bool:
        """Whether ``a`` dominates ``b`` through some path of dominance edges."""
        check_is_fitted(self, "result_")
        return b in self.network_.dominated_set(a)

    def dominated_set(self, a: str) -> set:
        check_is_fitted(self, "result_")
        return self.network_.dominated_set(a)

    @property
    def edges_(self) -> list[tuple[str, str]]:
        check_is_fitted(self, "result_")
        return self.network_.sorted_edges()

    def get_result(self) -> DominanceResult:
        check_is_fitted(self, "result_")
        return self.result_
