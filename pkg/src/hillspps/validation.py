"""Input-validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import column_or_1d

from .problems import SLProblem


def check_problem(problem) -> SLProblem:
    if not isinstance(problem, SLProblem):
        raise TypeError(f"expected an SLProblem, got {type(problem).__name__}")
    return problem


def check_lambdas(lam) -> np.ndarray:
    """Spectral parameter values as a finite 1-D float array (scalars become length 1)."""
    arr = np.asarray(lam, dtype=float)
    arr = column_or_1d(np.atleast_1d(arr), warn=False)
    if arr.size == 0:
        raise ValueError("no lambda values given")
    if not np.all(np.isfinite(arr)):
        raise ValueError("lambda values must be finite")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_range(lo: float, hi: float) -> tuple[float, float]:
    lo, hi = float(lo), float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("range endpoints must be finite")
    if not lo < hi:
        raise ValueError(f"empty lambda range [{lo}, {hi}]")
    return lo, hi
