"""Hill's discriminant as a power series in the spectral parameter.

Two constructions are provided.  The band-edge form is centered at the
lowest periodic eigenvalue ``lambda_0`` and has coefficients
``c_n = Xt[2n](T) + X[2n](T)``.  The general form is centered at an arbitrary
real ``lambda_star`` and is generated by the complex nodeless solution
``f* = f*_1 + i f*_2``; it is what locates ``lambda_0`` in the first place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .exceptions import NodalSolutionError, NoSignChangeError, NotBandEdgeError, SeriesBudgetError
from .grid import WORKING_DTYPE, simpson
from .problems import SLProblem
from .spps import (DEFAULT_ORDER, PERIODIC_RTOL, ROUNDING_TOL, TAIL_TOL, MainCoefficientSet,
                   build_main_coefficients, build_seed_coefficients, seed_solutions)

BAND_EDGE = "band_edge"
GENERAL_CENTER = "general_center"
#: relative imaginary residue tolerated in the general-center coefficients
IMAG_RTOL = 1e-9
SCAN_POINTS = 2000
ROOT_XTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscriminantSeries:
    """Truncated series ``D_N(lambda) = sum_n c_n (lambda - lambda_center)**n``.

    Calling the object evaluates it (vectorized, float64 result).
    """

    lambda_center: float
    coefficients: np.ndarray
    form: str = BAND_EDGE

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=WORKING_DTYPE)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two coefficients")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite discriminant coefficient")
        if self.form not in (BAND_EDGE, GENERAL_CENTER):
            raise ValueError(f"unknown series form {self.form!r}")
        if self.form == BAND_EDGE and abs(float(c[0]) - 2.0) > 1e-9:
            raise ValueError(f"band-edge series must start with c0 = 2, got {float(c[0])!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def _delta(self, lam):
        return np.asarray(lam, dtype=WORKING_DTYPE) - WORKING_DTYPE(self.lambda_center)

    def __call__(self, lam):
        dl = self._delta(lam)
        acc = np.zeros_like(dl)
        for c in self.coefficients[::-1]:
            acc = acc * dl + c
        out = acc.astype(float)
        return float(out) if out.ndim == 0 else out

    def derivative(self, lam):
        """``dD_N/dlambda`` from the term-differentiated series."""
        dl = self._delta(lam)
        n = np.arange(1, self.coefficients.size, dtype=WORKING_DTYPE)
        acc = np.zeros_like(dl)
        for c in (self.coefficients[1:] * n)[::-1]:
            acc = acc * dl + c
        out = acc.astype(float)
        return float(out) if out.ndim == 0 else out

    def tail_ratio(self, lam):
        """``|c_N dl**N| / max_n |c_n dl**n|`` (vectorized)."""
        dl = np.atleast_1d(self._delta(lam))
        terms = np.abs(self.coefficients[:, None] * dl[None, :] ** np.arange(self.coefficients.size)[:, None])
        biggest = terms.max(axis=0)
        ratio = np.where(biggest > 0, terms[-1] / np.where(biggest > 0, biggest, 1), 0).astype(float)
        return float(ratio[0]) if np.ndim(lam) == 0 else ratio

    def rounding_error(self, lam):
        """``eps * max_n |c_n dl**n| / max(1, |D_N|)``: relative cancellation error of the sum."""
        dl = np.atleast_1d(self._delta(lam))
        terms = self.coefficients[:, None] * dl[None, :] ** np.arange(self.coefficients.size)[:, None]
        total = np.abs(terms.sum(axis=0))
        err = (np.finfo(WORKING_DTYPE).eps * np.abs(terms).max(axis=0) / np.maximum(1, total)).astype(float)
        return float(err[0]) if np.ndim(lam) == 0 else err

    def within_budget(self, lam, tail_tol: float = TAIL_TOL):
        """Tail negligible and cancellation error below ``ROUNDING_TOL``."""
        return (self.tail_ratio(lam) <= tail_tol) & (self.rounding_error(lam) <= ROUNDING_TOL)

    def check_budget(self, lam, tail_tol: float = TAIL_TOL):
        """Raise :class:`SeriesBudgetError` at the first ``lam`` outside the budget."""
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        bad = ~np.atleast_1d(self.within_budget(lam_arr, tail_tol))
        if np.any(bad):
            where = float(lam_arr[np.argmax(bad)])
            raise SeriesBudgetError(f"series truncation insufficient at lambda={where!r}", lam=where)

    def budget_limit(self, tail_tol: float = TAIL_TOL, start: float | None = None,
                     step: float = 0.5, cap: float = 1e4) -> float:
        """Largest ``lambda`` (scanning upward from ``start``) inside the series budget."""
        lam = self.lambda_center if start is None else start
        while lam - self.lambda_center < cap and self.within_budget(lam + step, tail_tol):
            lam += step
        return lam


def evaluate(series: DiscriminantSeries, lam):
    """Horner evaluation of ``series`` at ``lam``."""
    return series(lam)


@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def __contains__(self, lam):
        return self.lower <= lam <= self.upper


def discriminant_series(coeffs: MainCoefficientSet) -> DiscriminantSeries:
    """Band-edge series ``c_n = Xt[2n](T) + X[2n](T)`` centered at ``coeffs.lambda_center``.

    Raises :class:`NotBandEdgeError` if the generating ``f0`` is not periodic.
    """
    f0 = coeffs.f0.values
    if abs(f0[-1] - f0[0]) > PERIODIC_RTOL * float(np.max(np.abs(f0))):
        raise NotBandEdgeError("f0 not periodic; the band-edge form does not apply")
    c = coeffs.X_tilde[0::2, -1] + coeffs.X[0::2, -1]
    c = c[: coeffs.order + 1]
    if np.iscomplexobj(c):
        c = c.real
    return DiscriminantSeries(float(coeffs.lambda_center), c, BAND_EDGE)


def general_center_coefficients(coeffs: MainCoefficientSet) -> np.ndarray:
    """Coefficients of the discriminant generated by an arbitrary (possibly complex) ``f0``.

    ``c_n = r Xt[2n](T) + X[2n](T)/r + (f0'(0) f0(T) - f0(0) f0'(T)) p(0) X[2n+1](T)``
    with ``r = f0(T)/f0(0)``.
    """
    f, fp = coeffs.f0.values, coeffs.f0_prime.values
    ratio = f[-1] / f[0]
    cross = (fp[0] * f[-1] - f[0] * fp[-1]) * WORKING_DTYPE(coeffs.p0)
    n = coeffs.order
    return (ratio * coeffs.X_tilde[0:2 * n + 1:2, -1] + coeffs.X[0:2 * n + 1:2, -1] / ratio
            + cross * coeffs.X[1:2 * n + 2:2, -1])


def discriminant_series_star(problem: SLProblem, lambda_star: float,
                             order: int = DEFAULT_ORDER) -> DiscriminantSeries:
    """General-center series in powers of ``lambda - lambda_star``.

    Built from ``f* = f*_1 + i f*_2`` where ``f*_1, f*_2`` are the normalized
    seed solutions at ``lambda_star``.  The imaginary parts of the
    coefficients must vanish to ``1e-9`` relative and are then dropped.
    """
    lambda_star = float(lambda_star)
    seeds = build_seed_coefficients(problem, lambda_star, 2 * order + 1)
    pair = seed_solutions(seeds, problem)
    f_star = pair.f1 + 1j * pair.f2
    f_star_prime = pair.f1_prime + 1j * pair.f2_prime
    try:
        coeffs = build_main_coefficients(f_star, f_star_prime, problem, lambda_star, order)
    except NodalSolutionError as exc:
        raise NodalSolutionError(f"f* has a node: {exc}") from exc
    c = general_center_coefficients(coeffs)
    residue = np.abs(c.imag) / np.maximum(1, np.abs(c))
    if float(residue.max()) > IMAG_RTOL:
        raise ArithmeticError(
            f"discriminant coefficients not real (relative imaginary residue {float(residue.max()):.2e})")
    return DiscriminantSeries(lambda_star, c.real, GENERAL_CENTER)


def lambda0_bounds(problem: SLProblem) -> Bounds:
    """``min q <= lambda_0 <= (1/T) int_0^T q`` (Rayleigh quotient with a constant trial function)."""
    q = problem.q_values.values.astype(float)
    mean = float(simpson(q, problem.grid.step)) / problem.period
    lower = float(q.min())
    # the mean of a sampled constant can land one ulp below its minimum
    return Bounds(lower, max(mean, lower))


def _first_crossing(series, lo, hi, level, points):
    mesh = np.linspace(lo, hi, points)
    g = series(mesh) - level
    for i in range(points - 1):
        if g[i] == 0:
            return float(mesh[i])
        if g[i] * g[i + 1] < 0:
            return bisect(lambda t: series(t) - level, mesh[i], mesh[i + 1], xtol=ROOT_XTOL)
    if g[-1] == 0:
        return float(mesh[-1])
    return None


def find_lambda0(problem: SLProblem, order: int = DEFAULT_ORDER, points: int = SCAN_POINTS) -> float:
    """Lowest periodic eigenvalue as the first zero of ``D*(lambda) - 2``.

    ``D*`` is centered at ``min q - 1``, where ``D > 2``; the scan runs over
    ``[min q - 1, mean q]`` (padded by a relative ``1e-3`` so a tight upper
    bound still brackets) and the first sign change is refined by bisection.
    """
    bounds = lambda0_bounds(problem)
    lo = bounds.lower - 1.0
    hi = bounds.upper + 1e-3 * (bounds.upper - lo)
    series = discriminant_series_star(problem, lo, order)
    root = _first_crossing(series, lo, hi, 2.0, points)
    if root is None:
        raise NoSignChangeError(
            f"D*(lambda) - 2 has no sign change on [{lo}, {hi}]; increase the order or mesh")
    return float(root)


def polish_lambda0(problem: SLProblem, lambda0: float, order: int = DEFAULT_ORDER,
                   max_iter: int = 6, max_shift: float = 1e-6) -> float:
    """Secant refinement of ``lambda0`` on the seed-solution discriminant ``f01(T) + f02'(T) - 2``.

    The general-center series and the seed recursion discretize the problem
    differently, so their roots differ by ~1e-12.  The seed route is the one
    that generates ``f0``; matching its root makes ``f0`` periodic to
    roundoff.  A refinement that wanders more than ``max_shift`` is
    discarded.
    """
    def g(lam):
        seeds = build_seed_coefficients(problem, lam, 2 * order + 1)
        return seed_solutions(seeds, problem).discriminant() - 2.0

    a = float(lambda0)
    b = a + 1e-9 * max(1.0, abs(a))
    ga, gb = g(a), g(b)
    for _ in range(max_iter):
        if gb == ga:
            break
        c = b - gb * (b - a) / (gb - ga)
        a, ga = b, gb
        b = c
        if abs(b - a) <= 4 * np.finfo(float).eps * max(1.0, abs(b)):
            break
        gb = g(b)
    if not np.isfinite(b) or abs(b - lambda0) > max_shift:
        return float(lambda0)
    return float(b)
