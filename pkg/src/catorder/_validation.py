"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numpy as np

from .core import DataError, ObservationSet


def check_category_values(X, y=None) -> ObservationSet:
    """Coerce estimator input into an :class:`ObservationSet`.

    Accepts ``(X, y)`` with one category label per value, or ``X`` alone as an
    ``(n, 2)`` table of ``(category, value)`` rows.
    """
    if y is None:
        arr = np.asarray(X, dtype=object)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DataError("expected an (n, 2) array of (category, value) rows when y is None")
        cats, vals = arr[:, 0], arr[:, 1]
    else:
        cats = _column(X, "X")
        vals = np.asarray(y, dtype=object).reshape(-1)
    try:
        values = np.asarray(vals, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid value: {exc}") from None
    return ObservationSet(tuple(str(c) for c in cats), values)


def check_categories(X) -> np.ndarray:
    return np.array([str(c).strip() for c in _column(X, "X")], dtype=object)


def _column(X, name):
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D or a single column, got shape {arr.shape}")
    return arr
