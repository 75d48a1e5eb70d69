"""Band edges, stability bands and Bloch (Floquet) solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .discriminant import DiscriminantSeries
from .exceptions import DegenerateError, SeriesBudgetError, VerificationError
from .grid import EPS_DIV
from .problems import SLProblem
from .spps import TAIL_TOL, SolutionPair

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"
#: how close an extremum of D must come to +-2 to count as a double band edge
TOUCH_TOL = 1e-7
ROOT_XTOL = 1e-12
#: spacing of the scan mesh in lambda
MESH_STEP = 1e-3
CHUNK = 4.0


@dataclass(frozen=True)
class Eigenvalue:
    index: int
    value: float
    boundary: str

    @property
    def level(self) -> float:
        return 2.0 if self.boundary == PERIODIC else -2.0


@dataclass(frozen=True)
class BandStructure:
    stable_intervals: list
    unstable_intervals: list
    scan_range: tuple
    edges: list


@dataclass(frozen=True)
class BlochData:
    lam: float
    beta_plus: complex
    beta_minus: complex
    alpha_plus: complex
    alpha_minus: complex


def _refine(series, level, a, b, xtol=ROOT_XTOL):
    """Bisect a sign change of ``D - level`` on ``[a, b]`` down to ``xtol``.

    Returns the final bracket end with ``|D| <= 2``, so Bloch factors at a
    computed edge are unimodular rather than sitting ``sqrt(residual)`` off.
    """
    ga = series(a) - level
    while b - a > xtol:
        m = 0.5 * (a + b)
        gm = series(m) - level
        if gm == 0:
            return float(m)
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b = m
    return float(a) if abs(series(a)) <= 2 else float(b)


def _crossings(series, lo, hi, step):
    """Band edges inside ``(lo, hi]`` as ``(value, level)`` tuples."""
    m = max(2, int(math.ceil((hi - lo) / step)) + 1)
    mesh = np.linspace(lo, hi, m)
    dp = series.derivative(mesh)

    def dfun(t):
        return series.derivative(t)

    # split the mesh at the extrema of D so every piece is monotone
    points = [mesh[0]]
    extrema = []
    for i in range(m - 1):
        if dp[i] * dp[i + 1] < 0:
            c = brentq(dfun, mesh[i], mesh[i + 1], xtol=ROOT_XTOL)
            if mesh[i] < c < mesh[i + 1]:
                points.append(c)
            extrema.append((c, dp[i] > 0))
        elif dp[i + 1] == 0 and dp[i] != 0 and i + 2 < m and dp[i] * dp[i + 2] < 0:
            # the slope vanishes exactly on a mesh node
            extrema.append((mesh[i + 1], dp[i] > 0))
        points.append(mesh[i + 1])
    points = np.array(points)
    vals = series(points)

    found = []
    for level in (2.0, -2.0):
        g = vals - level
        for j in range(len(points) - 1):
            a, b = points[j], points[j + 1]
            if g[j] * g[j + 1] < 0:
                found.append((_refine(series, level, a, b), level))
            elif g[j + 1] == 0 and g[j] != 0:
                found.append((float(b), level))
        for c, is_max in extrema:
            if is_max != (level > 0):
                continue
            dc = series(c)
            gap = level - dc if level > 0 else dc - level
            # maximum just below +2 (minimum just above -2): a closed or unresolved gap.
            # D does not cross the level there, so any root recorded next to c is
            # an exact hit on a mesh node and is replaced by the double root.
            if 0 <= gap <= TOUCH_TOL:
                found = [(r, lv) for r, lv in found if not (lv == level and abs(r - c) <= 2 * step)]
                found += [(float(c), level), (float(c), level)]
    found.sort(key=lambda t: t[0])
    return found


def _label(level):
    return PERIODIC if level > 0 else ANTIPERIODIC


def band_edges(series: DiscriminantSeries, lambda_min: float, lambda_max: float,
               tail_tol: float = TAIL_TOL, step: float = MESH_STEP) -> list:
    """All roots of ``D_N -+ 2`` in ``(lambda_min, lambda_max]`` as ``(value, boundary)`` pairs."""
    if not lambda_min < lambda_max:
        raise ValueError("empty lambda range")
    series.check_budget([lambda_min, lambda_max], tail_tol)
    out = []
    lo = lambda_min
    while lo < lambda_max:
        hi = min(lo + CHUNK, lambda_max)
        out += [(v, _label(lv)) for v, lv in _crossings(series, lo, hi, step)]
        lo = hi
    return out


def eigenvalues(series: DiscriminantSeries, count: int, tail_tol: float = TAIL_TOL,
                step: float = MESH_STEP) -> list:
    """First ``count`` periodic/antiperiodic eigenvalues from the truncated discriminant.

    The scan starts one unit below the series center and moves upward in
    chunks on a mesh of spacing ``step`` that is split at the extrema of
    ``D_N``; roots of ``D_N -+ 2`` are bracketed on monotone pieces and
    refined by bisection.  Extrema within ``1e-7`` of ``+-2`` that do not cross
    are reported as two coincident eigenvalues.

    Raises
    ------
    SeriesBudgetError
        The scan left the range where the truncated series is trustworthy
        before ``count`` roots were found; ``exc.partial`` holds those found.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    found = []
    lo = series.lambda_center - 1.0
    while len(found) < count:
        hi = lo + CHUNK
        if not series.within_budget(hi, tail_tol):
            partial = [Eigenvalue(i, v, b) for i, (v, b) in enumerate(found)]
            raise SeriesBudgetError(
                f"series truncation insufficient: only {len(found)} of {count} eigenvalues "
                f"below lambda={hi:.6g}", lam=hi, partial=partial)
        found += [(v, _label(lv)) for v, lv in _crossings(series, lo, hi, step)]
        lo = hi
    return [Eigenvalue(i, float(v), b) for i, (v, b) in enumerate(found[:count])]


def band_structure(series: DiscriminantSeries, lambda_min: float, lambda_max: float,
                   tail_tol: float = TAIL_TOL) -> BandStructure:
    """Partition ``[lambda_min, lambda_max]`` at the band edges into stable and unstable pieces.

    Pieces are classified by ``|D|`` at their midpoints.  Coincident double
    edges split a stable band into two touching stable intervals.
    """
    edges = band_edges(series, lambda_min, lambda_max, tail_tol)
    cuts = [lambda_min] + [v for v, _ in edges if lambda_min < v < lambda_max] + [lambda_max]
    stable, unstable = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        (stable if abs(series(mid)) <= 2 else unstable).append((float(a), float(b)))
    edge_list = [Eigenvalue(i, v, lab) for i, (v, lab) in enumerate(edges)]
    return BandStructure(stable, unstable, (float(lambda_min), float(lambda_max)), edge_list)


def bloch_factors(d_value: float):
    """Floquet multipliers ``(D -+ s)/2`` with ``s**2 = D**2 - 4``.

    Inside a band ``s = +i sqrt(4 - D**2)``; in a gap ``s`` takes the sign of
    ``D`` so that ``beta_plus`` is always the factor with ``|beta| <= 1``.
    """
    d = float(np.real(d_value))
    disc = d * d - 4.0
    if disc < 0:
        s = 1j * math.sqrt(-disc)
    else:
        s = math.copysign(math.sqrt(disc), d) if d != 0 else math.sqrt(disc)
    return complex(0.5 * (d - s)), complex(0.5 * (d + s))


def self_matching(pair: SolutionPair, problem: SLProblem, check_tol: float = 1e-8) -> BlochData:
    """Self-matching combinations ``F = f1 + alpha f2`` with ``F(T) = beta F(0)``.

    ``alpha`` solves ``f2(T) a**2 + (f1(T) - f2'(T)) a - f1'(T) = 0``; ``alpha_plus``
    belongs to ``beta_plus`` of :func:`bloch_factors`.  The ratio
    ``F(T)/F(0)`` is checked against the closed form.
    """
    f1T, f2T = complex(pair.f1.end), complex(pair.f2.end)
    f2pT = complex(pair.f2_prime.end)
    scale = max(float(np.max(np.abs(pair.f2.values))), 1e-300)
    if abs(f2T) <= EPS_DIV * scale:
        raise DegenerateError(f"degenerate quadratic: f2(T) vanishes at lambda={pair.lam}")
    d = (f1T + f2pT).real
    beta_p, beta_m = bloch_factors(d)
    s = beta_m - beta_p
    alpha_p = ((f2pT - f1T) - s) / (2 * f2T)
    alpha_m = ((f2pT - f1T) + s) / (2 * f2T)
    for alpha, beta in ((alpha_p, beta_p), (alpha_m, beta_m)):
        ratio = (f1T + alpha * f2T) / complex(pair.f1.start + alpha * pair.f2.start)
        if abs(ratio - beta) > check_tol * max(1.0, abs(beta)):
            raise VerificationError(f"Bloch factor mismatch at lambda={pair.lam}: {ratio} vs {beta}")
    return BlochData(float(np.real(pair.lam)), beta_p, beta_m, complex(alpha_p), complex(alpha_m))


def self_matching_solution(data: BlochData, pair: SolutionPair, branch: str = "+") -> np.ndarray:
    """Samples of ``F_{+-} = f1 + alpha_{+-} f2`` on one period."""
    alpha = data.alpha_plus if branch == "+" else data.alpha_minus
    return pair.f1.values.astype(complex) + alpha * pair.f2.values.astype(complex)


def bloch_solution(data: BlochData, pair: SolutionPair, x, branch: str = "+"):
    """Quasiperiodic solution ``beta**n F(x - nT)`` with ``n = floor(x/T)``.

    ``F`` is interpolated linearly between nodes.  ``x`` may be an array.
    """
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    beta = data.beta_plus if branch == "+" else data.beta_minus
    F = self_matching_solution(data, pair, branch)
    nodes = pair.grid.nodes
    period = pair.grid.period
    xs = np.asarray(x, dtype=float)
    n = np.floor(xs / period)
    local = xs - n * period
    vals = np.interp(local, nodes, F.real) + 1j * np.interp(local, nodes, F.imag)
    out = vals * np.power(complex(beta), n)
    return complex(out) if out.ndim == 0 else out
