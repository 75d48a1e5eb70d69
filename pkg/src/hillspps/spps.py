"""Spectral parameter power series (SPPS) solutions of ``-(p f')' + q f = lambda f``.

Two families of recursive integrals are built here:

* seed families ``Xt0[n]``, ``X0[n]`` at a fixed ``lambda_star``; they give the
  normalized solutions there and, at a band edge, the periodic nodeless
  ground solution ``f0``;
* main families ``Xt[n]``, ``X[n]`` generated by ``f0``, whose values give the
  fundamental pair for every ``lambda`` as power series in
  ``lambda - lambda_center``.

Coefficient families are stored as 2-D arrays ``(order + 1, n_points)`` in
extended precision; row ``n`` is the ``n``-th recursive integral.
Derivatives are assembled from the recursion structure, never by
differencing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, NodalSolutionError, NotBandEdgeError, SeriesBudgetError
from .grid import (COMPLEX_DTYPE, EPS_DIV, WORKING_DTYPE, GridFunction, cumulative_simpson)
from .problems import SLProblem

DEFAULT_ORDER = 100
#: last-term / largest-term ratio allowed when summing a truncated series
TAIL_TOL = 1e-12
#: largest tolerated ``eps * max|term| / max(1, |sum|)`` when summing a series
ROUNDING_TOL = 1e-6
#: periodicity tolerance for f0, relative to max|f0|
PERIODIC_RTOL = 1e-6


def _dtype_for(*values):
    if any(np.iscomplexobj(v) for v in values):
        return COMPLEX_DTYPE
    return WORKING_DTYPE


def _step(problem):
    return WORKING_DTYPE(problem.period) / (problem.n_points - 1)


@dataclass(frozen=True, eq=False)
class SeedCoefficientSet:
    """Recursive integrals at ``lambda_star``: ``X_tilde0[n]`` and ``X_0[n]`` for ``n <= order``."""

    lambda_star: complex
    X_tilde0: np.ndarray
    X_0: np.ndarray
    order: int


@dataclass(frozen=True, eq=False)
class MainCoefficientSet:
    """Recursive integrals generated by the nodeless solution ``f0``, indices ``0 .. 2N+1``."""

    lambda_center: float
    X_tilde: np.ndarray
    X: np.ndarray
    order: int
    f0: GridFunction
    f0_prime: GridFunction
    p0: float

    @property
    def grid(self):
        return self.f0.grid


@dataclass(frozen=True, eq=False)
class SolutionPair:
    """Normalized solutions ``f1, f2`` (``f1(0) = f2'(0) = 1``, ``f1'(0) = f2(0) = 0``)."""

    lam: complex
    f1: GridFunction
    f2: GridFunction
    f1_prime: GridFunction
    f2_prime: GridFunction

    @property
    def grid(self):
        return self.f1.grid

    def discriminant(self) -> float:
        """``f1(T) + f2'(T)``."""
        d = self.f1.end + self.f2_prime.end
        return complex(d) if np.iscomplexobj(d) else float(d)

    def monodromy(self) -> np.ndarray:
        """Period map ``[[f1, f2], [f1', f2']]`` evaluated at ``T``."""
        return np.array([[self.f1.end, self.f2.end], [self.f1_prime.end, self.f2_prime.end]],
                        dtype=complex if np.iscomplexobj(self.f1.values) else float)

    def wronskian(self, problem: SLProblem) -> np.ndarray:
        """``p (f1 f2' - f1' f2)`` at every node."""
        p = problem.p_values.values
        return p * (self.f1.values * self.f2_prime.values - self.f1_prime.values * self.f2.values)

    def initial_defect(self) -> float:
        """``|f1(0) - 1| + |f1'(0)| + |f2(0)| + |f2'(0) - 1|``."""
        return float(abs(self.f1.start - 1) + abs(self.f1_prime.start)
                     + abs(self.f2.start) + abs(self.f2_prime.start - 1))


def build_seed_coefficients(problem: SLProblem, lambda_star, order: int = 2 * DEFAULT_ORDER + 1
                            ) -> SeedCoefficientSet:
    """Seed recursive integrals at ``lambda_star`` up to index ``order``.

    ``X_tilde0`` integrates against ``q - lambda_star`` at odd steps and
    ``1/p`` at even steps; ``X_0`` uses the opposite parity.
    """
    if order < 1:
        raise ValueError("seed order must be >= 1")
    dtype = _dtype_for(lambda_star)
    h = _step(problem)
    p = problem.p_values.values.astype(WORKING_DTYPE)
    w = problem.q_values.values.astype(WORKING_DTYPE) - np.asarray(lambda_star).astype(dtype)
    inv_p = 1 / p
    Xt = np.empty((order + 1, problem.n_points), dtype=dtype)
    X = np.empty_like(Xt)
    Xt[0] = 1
    X[0] = 1
    for n in range(1, order + 1):
        if n % 2:
            Xt[n] = cumulative_simpson(Xt[n - 1] * w, h)
            X[n] = cumulative_simpson(X[n - 1] * inv_p, h)
        else:
            Xt[n] = cumulative_simpson(Xt[n - 1] * inv_p, h)
            X[n] = cumulative_simpson(X[n - 1] * w, h)
    return SeedCoefficientSet(lambda_star, Xt, X, order)


def seed_solutions(coeffs: SeedCoefficientSet, problem: SLProblem) -> SolutionPair:
    """Normalized pair at ``lambda_star`` from the seed families.

    ``f01 = sum_even Xt0``, ``f02 = p(0) sum_odd X0``; since each even step of
    ``Xt0`` differentiates to ``Xt0[n-1] / p``, ``p f01' = sum_odd Xt0`` and
    likewise ``p f02' = p(0) sum_even X0``.
    """
    grid = problem.grid
    p = problem.p_values.values.astype(WORKING_DTYPE)
    p0 = p[0]
    Xt, X = coeffs.X_tilde0, coeffs.X_0
    f1 = Xt[0::2].sum(axis=0)
    f1p = Xt[1::2].sum(axis=0) / p
    f2 = p0 * X[1::2].sum(axis=0)
    f2p = p0 * X[0::2].sum(axis=0) / p
    return SolutionPair(coeffs.lambda_star, GridFunction(grid, f1), GridFunction(grid, f2),
                        GridFunction(grid, f1p), GridFunction(grid, f2p))


def periodic_ground_solution(pair: SolutionPair, problem: SLProblem):
    """Periodic combination ``f0 = f01 + alpha f02`` at a band edge ``lambda_0``.

    ``alpha = (f02'(T) - f01(T)) / (2 f02(T))``.  Returns ``(f0, f0_prime)``.

    Raises
    ------
    NotBandEdgeError
        ``f0(T)`` differs from ``f0(0)`` by more than ``1e-6 max|f0|``.
    DegenerateError
        ``f02(T)`` vanishes while ``f02'(T) != f01(T)`` (coexistence case).
    NodalSolutionError
        The periodic combination has a zero on ``[0, T]``.
    """
    f1, f2, f1p, f2p = pair.f1.values, pair.f2.values, pair.f1_prime.values, pair.f2_prime.values
    scale = max(float(np.max(np.abs(f2))), 1e-300)
    numerator = f2p[-1] - f1[-1]
    if abs(f2[-1]) <= EPS_DIV * scale:
        tol = PERIODIC_RTOL * float(np.max(np.abs(f1)))
        if abs(numerator) > tol:
            raise DegenerateError("f02(T) vanishes but f02'(T) != f01(T); alpha is undefined")
        alpha = 0
    else:
        alpha = numerator / (2 * f2[-1])
    f0 = f1 + alpha * f2
    f0p = f1p + alpha * f2p
    tol = PERIODIC_RTOL * float(np.max(np.abs(f0)))
    if abs(f0[-1] - f0[0]) > tol:
        raise NotBandEdgeError(
            f"not a band edge: |f0(T) - f0(0)| = {float(abs(f0[-1] - f0[0])):.3e} at lambda={pair.lam}")
    if float(np.min(np.abs(f0))) <= EPS_DIV * float(np.max(np.abs(f0))) or (
            np.isrealobj(f0) and np.any(np.sign(f0) != np.sign(f0[0]))):
        raise NodalSolutionError("periodic solution has a node on [0, T]")
    grid = pair.grid
    return GridFunction(grid, f0), GridFunction(grid, f0p)


def build_main_coefficients(f0: GridFunction, f0_prime: GridFunction, problem: SLProblem,
                            lambda_center: float, order: int = DEFAULT_ORDER) -> MainCoefficientSet:
    """Main recursive integrals up to index ``2 order + 1``.

    ``X_tilde`` integrates ``f0^2`` at odd steps and ``-1/(p f0^2)`` at even
    steps; ``X`` the reverse.  ``f0`` may be complex.
    """
    if order < 1:
        raise ValueError("series order must be >= 1")
    dtype = _dtype_for(f0.values)
    f = f0.values.astype(dtype)
    p = problem.p_values.values.astype(WORKING_DTYPE)
    f_sq = f * f
    # guard |f0| rather than |f0|^2: a nodeless but strongly growing f0 would
    # otherwise exhaust the relative margin twice as fast
    mag = np.abs(f)
    if float(np.min(mag)) <= EPS_DIV * float(np.max(mag)):
        i = int(np.argmin(mag))
        raise NodalSolutionError(
            f"near-vanishing denominator: f0 has a node near x={problem.grid.nodes[i]!r}")
    neg_inv = -1 / (p * f_sq)
    h = _step(problem)
    size = 2 * order + 2
    Xt = np.empty((size, problem.n_points), dtype=dtype)
    X = np.empty_like(Xt)
    Xt[0] = 1
    X[0] = 1
    for n in range(1, size):
        if n % 2:
            Xt[n] = cumulative_simpson(Xt[n - 1] * f_sq, h)
            X[n] = cumulative_simpson(X[n - 1] * neg_inv, h)
        else:
            Xt[n] = cumulative_simpson(Xt[n - 1] * neg_inv, h)
            X[n] = cumulative_simpson(X[n - 1] * f_sq, h)
    return MainCoefficientSet(lambda_center, Xt, X, order,
                              GridFunction(f0.grid, f), GridFunction(f0.grid, f0_prime.values.astype(dtype)),
                              float(problem.p_values.values[0]))


def horner(rows: np.ndarray, delta) -> np.ndarray:
    """``sum_n rows[n] * delta**n`` evaluated by Horner's scheme (elementwise)."""
    acc = np.zeros_like(rows[0], dtype=np.result_type(rows.dtype, np.asarray(delta).dtype))
    for row in rows[::-1]:
        acc = acc * delta + row
    return acc


def tail_ratio(rows_at_T: np.ndarray, delta) -> float:
    """``|last term| / max|term|`` of ``sum rows_at_T[n] delta**n``."""
    powers = np.asarray(delta, dtype=np.result_type(rows_at_T.dtype, np.asarray(delta).dtype)) ** np.arange(
        len(rows_at_T))
    terms = np.abs(rows_at_T * powers)
    biggest = terms.max()
    if biggest == 0:
        return 0.0
    return float(terms[-1] / biggest)


def rounding_error(rows_at_T: np.ndarray, delta) -> float:
    """``eps * max|term| / max(1, |sum|)`` for ``sum rows_at_T[n] delta**n``."""
    powers = np.asarray(delta, dtype=np.result_type(rows_at_T.dtype, np.asarray(delta).dtype)) ** np.arange(
        len(rows_at_T))
    terms = rows_at_T * powers
    eps = np.finfo(np.real(terms).dtype).eps
    return float(eps * np.abs(terms).max() / max(1.0, float(abs(terms.sum()))))


def sigma_series(coeffs: MainCoefficientSet, lam):
    """The four spectral series at every node.

    Returns ``(S0t, S1t_deflated, S0, S1)`` where ``S1t_deflated`` is the series
    ``sum_{n>=1} Xt[2n-1] dl**(n-1)`` (so ``Sigma~_1 = dl * S1t_deflated``).
    """
    dl = _delta(coeffs, lam)
    Xt, X = coeffs.X_tilde, coeffs.X
    return (horner(Xt[0::2], dl), horner(Xt[1::2], dl),
            horner(X[0::2], dl), horner(X[1::2], dl))


def _delta(coeffs, lam):
    if np.iscomplexobj(lam):
        return np.asarray(lam, dtype=COMPLEX_DTYPE) - WORKING_DTYPE(coeffs.lambda_center)
    return WORKING_DTYPE(lam) - WORKING_DTYPE(coeffs.lambda_center)


def check_budget(coeffs: MainCoefficientSet, lam, tail_tol: float = TAIL_TOL) -> None:
    """Raise :class:`SeriesBudgetError` if a truncated series tail is not negligible at ``x = T``."""
    dl = _delta(coeffs, lam)
    Xt, X = coeffs.X_tilde[:, -1], coeffs.X[:, -1]
    for rows in (Xt[0::2], Xt[1::2], X[0::2], X[1::2]):
        if tail_ratio(rows, dl) > tail_tol:
            raise SeriesBudgetError(
                f"series budget exceeded at lambda={lam}: raise the order or move the center", lam=lam)
        if rounding_error(rows, dl) > ROUNDING_TOL:
            raise SeriesBudgetError(
                f"series budget exceeded at lambda={lam}: cancellation between terms", lam=lam)


def fundamental_solutions(coeffs: MainCoefficientSet, problem: SLProblem, lam,
                          tail_tol: float = TAIL_TOL) -> SolutionPair:
    """Normalized pair at ``lam``.

    ``f1 = (f0/f0(0)) S0t + p(0) f0'(0) f0 S1`` and ``f2 = -p(0) f0(0) f0 S1``;
    derivatives use ``S0t' = -S1t/(p f0^2)`` and ``S1' = -S0/(p f0^2)``.
    """
    check_budget(coeffs, lam, tail_tol)
    dl = _delta(coeffs, lam)
    s0t, s1t_defl, s0, s1 = sigma_series(coeffs, lam)
    s1t = dl * s1t_defl
    f0, f0p = coeffs.f0.values, coeffs.f0_prime.values
    p = problem.p_values.values.astype(WORKING_DTYPE)
    p0 = p[0]
    w = 1 / (p * f0 * f0)
    a, b = f0[0], f0p[0]
    f1 = f0 / a * s0t + p0 * b * f0 * s1
    f1p = f0p / a * s0t - f0 / a * s1t * w + p0 * b * (f0p * s1 - f0 * s0 * w)
    f2 = -p0 * a * f0 * s1
    f2p = -p0 * a * (f0p * s1 - f0 * s0 * w)
    grid = problem.grid
    return SolutionPair(lam, GridFunction(grid, f1), GridFunction(grid, f2),
                        GridFunction(grid, f1p), GridFunction(grid, f2p))


def ground_state(problem: SLProblem, lambda0: float, order: int = DEFAULT_ORDER):
    """``(f0, f0_prime)`` at the band edge ``lambda0`` via seed solutions of order ``2 order + 1``."""
    seeds = build_seed_coefficients(problem, lambda0, 2 * order + 1)
    return periodic_ground_solution(seed_solutions(seeds, problem), problem)


__all__ = [
    "SeedCoefficientSet", "MainCoefficientSet", "SolutionPair", "build_seed_coefficients",
    "seed_solutions", "periodic_ground_solution", "build_main_coefficients",
    "fundamental_solutions", "sigma_series", "check_budget", "horner", "ground_state",
]
