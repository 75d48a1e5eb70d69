"""Darboux (SUSY) partner of a Hill problem generated by its ground state.

With ``Phi = -p^{1/2} f0'/f0`` the operator factorizes as
``(-d p^{1/2} + Phi)(p^{1/2} d + Phi) + lambda_0`` and the map
``f -> p^{1/2} f' + Phi f`` sends solutions to solutions of the partner
equation with potential ``q~ = q + 2 p^{1/2} Phi' - p^{1/2} (p^{1/2})''``.
The partner shares the Hill discriminant of the original problem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discriminant import DiscriminantSeries, discriminant_series
from .exceptions import NodalSolutionError, VerificationError
from .grid import EPS_DIV, WORKING_DTYPE, GridFunction
from .problems import SampledPotential, SLProblem
from .spps import MainCoefficientSet, SolutionPair, check_budget, sigma_series

FACTOR_RTOL = 1e-5
INVARIANCE_TOL = 1e-6
PERIODIC_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class DarbouxPartner:
    """Superpotential, partner potential and partner ground state on the shared grid."""

    problem: SLProblem
    lambda0: float
    f0: GridFunction
    f0_prime: GridFunction
    phi: GridFunction
    q_tilde: GridFunction
    problem_tilde: SLProblem
    f0_tilde: GridFunction
    f0_tilde_prime: GridFunction
    factorization_residual: float


def _centered(values, step):
    return (values[2:] - values[:-2]) / (2 * step)


def _superpotential_slope(problem, q, lambda0, f, fp):
    """``Phi'`` with ``f''`` taken from ``(p f')' = (q - lambda0) f``."""
    p = problem.p_values.values.astype(float)
    sp, sp1 = problem.sqrt_p, problem.sqrt_p_prime
    fpp = ((q - lambda0) * f - problem.p_prime_values * fp) / p
    return -sp * (fpp * f - fp * fp) / (f * f) - sp1 * fp / f


def _real(gf):
    return np.asarray(gf.values.real if np.iscomplexobj(gf.values) else gf.values, dtype=float)


def factorize(problem: SLProblem, f0: GridFunction, f0_prime: GridFunction, lambda0: float,
              rtol: float = FACTOR_RTOL) -> DarbouxPartner:
    """Build the SUSY partner from the periodic nodeless ground state ``f0``.

    Verifies ``q = Phi**2 - (p^{1/2} Phi)' + lambda0`` at interior nodes
    (centered differences) to ``rtol * max(1, max|q|)``.

    Raises
    ------
    NodalSolutionError
        ``f0`` has a node.
    VerificationError
        The factorization identity fails (``f0`` is not a ground state of ``problem``).
    """
    f = _real(f0)
    fp = _real(f0_prime)
    if float(np.min(np.abs(f))) <= EPS_DIV * float(np.max(np.abs(f))) or np.any(np.sign(f) != np.sign(f[0])):
        raise NodalSolutionError("f0 has a node; the Darboux construction needs a nodeless seed")
    grid = problem.grid
    h = grid.step
    q = problem.q_values.values.astype(float)
    sp = problem.sqrt_p
    phi = -sp * fp / f
    dphi = _superpotential_slope(problem, q, lambda0, f, fp)
    q_tilde = q + 2 * sp * dphi - sp * problem.sqrt_p_second

    scale = max(1.0, float(np.max(np.abs(q))))
    residual = float(np.max(np.abs(phi[1:-1] ** 2 - _centered(sp * phi, h) + lambda0 - q[1:-1])))
    if residual > rtol * scale:
        raise VerificationError(f"factorization residual too large: {residual:.3e}")

    for label, v in (("Phi", phi), ("q~", q_tilde)):
        if abs(v[-1] - v[0]) > PERIODIC_RTOL * max(1.0, float(np.max(np.abs(v)))):
            raise VerificationError(f"{label} is not periodic; f0 is not a periodic ground state")

    f_tilde = 1 / (sp * f)
    # (1/(p^{1/2} f))' = -((p^{1/2})' f + p^{1/2} f') / (p f^2)
    f_tilde_prime = -(problem.sqrt_p_prime * f + sp * fp) / (sp * sp * f * f)
    partner_problem = problem.with_potential(SampledPotential(grid.nodes, q_tilde),
                                             name=f"partner of {problem.name}")
    return DarbouxPartner(problem, float(lambda0), GridFunction(grid, f), GridFunction(grid, fp),
                          GridFunction(grid, phi), GridFunction(grid, q_tilde), partner_problem,
                          GridFunction(grid, f_tilde), GridFunction(grid, f_tilde_prime), residual)


def darboux_transform(partner: DarbouxPartner, f: GridFunction, f_prime: GridFunction) -> GridFunction:
    """``p^{1/2} f' + Phi f``."""
    sp = partner.problem.sqrt_p
    return GridFunction(f.grid, sp * np.asarray(f_prime.values) + partner.phi.values * np.asarray(f.values))


def partner_solutions(partner: DarbouxPartner, coeffs: MainCoefficientSet, lam) -> SolutionPair:
    """Normalized solutions of the partner equation at ``lam``.

    ``f~1 = (c/(p^{1/2} f0)) [p^{1/2}(0) f0(0) S0 + ((p^{1/2})'(0) - Phi(0)) S1t/f0(0)]`` and
    ``f~2 = p^{1/2}(0) S1t / (f0(0) p^{1/2} f0)`` where ``S1t`` is the deflated series
    ``sum Xt[2n-1] dl**(n-1)``, so ``lam = lambda_0`` needs no special case.
    """
    check_budget(coeffs, lam)
    prob = partner.problem
    dl = WORKING_DTYPE(lam) - WORKING_DTYPE(coeffs.lambda_center)
    s0t, s1t, s0, s1 = sigma_series(coeffs, lam)
    f = coeffs.f0.values.astype(WORKING_DTYPE)
    fp = coeffs.f0_prime.values.astype(WORKING_DTYPE)
    sp = prob.sqrt_p.astype(WORKING_DTYPE)
    sp1 = prob.sqrt_p_prime.astype(WORKING_DTYPE)
    phi0 = WORKING_DTYPE(partner.phi.values[0])
    a = f[0]
    g = 1 / (sp * f)
    gp = -(sp1 * f + sp * fp) / (sp * sp * f * f)
    f_sq = f * f
    # S0' = dl f0^2 S1 and (S1t)' = f0^2 S0t
    ds0 = dl * f_sq * s1
    ds1t = f_sq * s0t
    k1 = sp[0] * a
    k2 = (sp1[0] - phi0) / a
    k3 = sp[0] / a
    f1 = g * (k1 * s0 + k2 * s1t)
    f1p = gp * (k1 * s0 + k2 * s1t) + g * (k1 * ds0 + k2 * ds1t)
    f2 = k3 * g * s1t
    f2p = k3 * (gp * s1t + g * ds1t)
    grid = prob.grid
    return SolutionPair(lam, GridFunction(grid, f1), GridFunction(grid, f2),
                        GridFunction(grid, f1p), GridFunction(grid, f2p))


def invariance_deviation(partner: DarbouxPartner, coeffs: MainCoefficientSet, probes) -> float:
    """``max |D(lam) - (f~1(T) + f~2'(T))|`` over the probe values."""
    series = discriminant_series(coeffs)
    worst = 0.0
    for lam in np.atleast_1d(probes):
        d_tilde = partner_solutions(partner, coeffs, float(lam)).discriminant()
        worst = max(worst, abs(series(float(lam)) - d_tilde))
    return worst


def default_probes(coeffs: MainCoefficientSet, count: int = 20, span: float = 30.0):
    lam0 = float(coeffs.lambda_center)
    return np.linspace(lam0 - 1.0, lam0 + span, count)


def partner_discriminant(partner: DarbouxPartner, coeffs: MainCoefficientSet, probes=None,
                         tol: float = INVARIANCE_TOL) -> DiscriminantSeries:
    """Discriminant of the partner equation.

    Its coefficients coincide with those of the original problem; the
    identity is checked by evaluating ``f~1(T) + f~2'(T)`` at the probes.

    Raises
    ------
    VerificationError
        ``SUSY invariance violated`` beyond ``tol``.
    """
    if probes is None:
        probes = default_probes(coeffs)
    dev = invariance_deviation(partner, coeffs, probes)
    if dev > tol:
        raise VerificationError(f"SUSY invariance violated: max|D - D~| = {dev:.3e}")
    return discriminant_series(coeffs)


def double_darboux(partner: DarbouxPartner, rtol: float = FACTOR_RTOL) -> GridFunction:
    """Partner of the partner, generated by ``f~0``; should give back ``q``.

    Also checks ``Phi_1 = (p^{1/2})' - Phi``.

    Raises
    ------
    VerificationError
        ``involution check failed``.
    """
    prob = partner.problem
    f = partner.f0_tilde.values.astype(float)
    fp = partner.f0_tilde_prime.values.astype(float)
    sp = prob.sqrt_p
    phi1 = -sp * fp / f
    q_t = partner.q_tilde.values.astype(float)
    dphi1 = _superpotential_slope(prob, q_t, partner.lambda0, f, fp)
    q_tt = q_t + 2 * sp * dphi1 - sp * prob.sqrt_p_second
    q = prob.q_values.values.astype(float)
    tol = rtol * max(1.0, float(np.max(np.abs(q))))
    phi_err = float(np.max(np.abs(phi1 - (prob.sqrt_p_prime - partner.phi.values))))
    q_err = float(np.max(np.abs(q_tt - q)))
    if phi_err > tol or q_err > tol:
        raise VerificationError(
            f"involution check failed: |Phi1 - ((p^1/2)' - Phi)| = {phi_err:.3e}, |q~~ - q| = {q_err:.3e}")
    return GridFunction(prob.grid, q_tt)


def partner_problem_periodicity(partner: DarbouxPartner) -> float:
    """Largest end-to-end jump of ``Phi``, ``q~`` and ``f~0`` relative to their scale."""
    worst = 0.0
    for gf in (partner.phi, partner.q_tilde, partner.f0_tilde):
        v = gf.values.astype(float)
        worst = max(worst, abs(v[-1] - v[0]) / max(1.0, float(np.max(np.abs(v)))))
    return worst
