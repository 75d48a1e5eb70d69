"""Estimator-style front end: fit a problem once, then query its discriminant."""
from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import darboux, spectrum
from .discriminant import discriminant_series, find_lambda0, lambda0_bounds, polish_lambda0
from .spps import DEFAULT_ORDER, TAIL_TOL, build_main_coefficients, fundamental_solutions, ground_state
from .validation import check_lambdas, check_positive_int, check_problem, check_range


class HillDiscriminant(BaseEstimator):
    """Hill discriminant of a periodic Sturm-Liouville problem as a power series.

    ``fit`` locates the lowest periodic eigenvalue ``lambda_0``, builds the
    nodeless ground state there and the recursive-integral families around
    it; ``predict`` evaluates ``D(lambda)``.

    Parameters
    ----------
    order : int
        Series truncation ``N``; the recursions run to index ``2N + 1``.
    lambda0 : float or None
        Skip the search and expand around this band edge.
    polish : bool
        Refine ``lambda_0`` against the seed-solution discriminant so the
        ground state is periodic to roundoff.
    tail_tol : float
        Largest acceptable relative size of the last retained series term.

    Attributes
    ----------
    problem_ : SLProblem
    bounds_ : Bounds
    lambda0_ : float
    f0_, f0_prime_ : GridFunction
    coefficients_ : MainCoefficientSet
    series_ : DiscriminantSeries
    timings_ : dict
        Wall-clock seconds per fitting stage.
    """

    def __init__(self, order: int = DEFAULT_ORDER, lambda0: float | None = None,
                 polish: bool = True, tail_tol: float = TAIL_TOL):
        self.order = order
        self.lambda0 = lambda0
        self.polish = polish
        self.tail_tol = tail_tol

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        order = check_positive_int(self.order, "order")
        timings = {}
        t = time.perf_counter()
        self.bounds_ = lambda0_bounds(problem)
        lam0 = find_lambda0(problem, order) if self.lambda0 is None else float(self.lambda0)
        if self.polish:
            lam0 = polish_lambda0(problem, lam0, order)
        timings["lambda0"] = time.perf_counter() - t

        t = time.perf_counter()
        self.f0_, self.f0_prime_ = ground_state(problem, lam0, order)
        self.coefficients_ = build_main_coefficients(self.f0_, self.f0_prime_, problem, lam0, order)
        self.series_ = discriminant_series(self.coefficients_)
        timings["coefficients"] = time.perf_counter() - t

        self.problem_ = problem
        self.lambda0_ = lam0
        self.timings_ = timings
        self._partner = None
        return self

    def predict(self, lam):
        """``D_N(lambda)``; raises :class:`SeriesBudgetError` outside the trusted range."""
        check_is_fitted(self, "series_")
        lam = check_lambdas(lam)
        self.series_.check_budget(lam, self.tail_tol)
        return np.atleast_1d(self.series_(lam))

    def solutions(self, lam):
        """Normalized fundamental pair at ``lam``."""
        check_is_fitted(self, "series_")
        return fundamental_solutions(self.coefficients_, self.problem_, float(lam), self.tail_tol)

    def eigenvalues(self, count: int):
        check_is_fitted(self, "series_")
        return spectrum.eigenvalues(self.series_, check_positive_int(count, "count"), self.tail_tol)

    def band_structure(self, lambda_min: float, lambda_max: float):
        check_is_fitted(self, "series_")
        lo, hi = check_range(lambda_min, lambda_max)
        return spectrum.band_structure(self.series_, lo, hi, self.tail_tol)

    def bloch(self, lam: float):
        """``(BlochData, SolutionPair)`` at ``lam``."""
        pair = self.solutions(lam)
        return spectrum.self_matching(pair, self.problem_), pair

    def partner(self):
        """The Darboux partner generated by the fitted ground state (cached)."""
        check_is_fitted(self, "series_")
        if self._partner is None:
            self._partner = darboux.factorize(self.problem_, self.f0_, self.f0_prime_, self.lambda0_)
        return self._partner

    def invariance_deviation(self, probes=None) -> float:
        """``max |D - D~|`` over ``probes`` (default: 20 points on ``[lambda_0 - 1, lambda_0 + 30]``)."""
        partner = self.partner()
        if probes is None:
            probes = darboux.default_probes(self.coefficients_)
        return darboux.invariance_deviation(partner, self.coefficients_, check_lambdas(probes))
