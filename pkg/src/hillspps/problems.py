"""Periodic Sturm-Liouville problems ``-(p f')' + q f = lambda f``.

Holds the problem type, the built-in catalog (Mathieu, constant
coefficients), the YAML configuration surface and an adaptive Runge-Kutta
reference integrator that is independent of the SPPS machinery.

Configuration documents are YAML mappings::

    name: my-problem            # optional label
    T: 3.141592653589793        # period, required unless a builtin fixes it
    builtin: mathieu            # optional: mathieu (needs r) or free
    r: 1.0
    p: 1                        # constant ...
    p_fourier: {a0: 1.0, a: [0.2], b: []}   # ... or a truncated Fourier series
    q: {builtin: mathieu, r: 1}             # named built-in coefficient
    q_fourier: {a0: 0, a: [2], b: []}

A Fourier block stands for ``a0 + sum_k a[k-1] cos(2 pi k x/T) + b[k-1] sin(2 pi k x/T)``
with ``k = 1, 2, ...``; ``q: {fourier: {...}}`` is accepted as well.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import yaml
from scipy.integrate import solve_ivp

from .exceptions import OracleError, ProblemError
from .grid import make_grid, periodic_gradient, sample

DEFAULT_POINTS = 7001
#: relative tolerance for T-periodicity checks of sampled data
PERIODICITY_TOL = 1e-6


@dataclass(frozen=True)
class FourierSeries:
    """``a0 + sum_k a_k cos(2 pi k x / period) + b_k sin(2 pi k x / period)``."""

    period: float
    a0: float = 0.0
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "a0", float(self.a0))

    def _freq(self, k):
        return 2 * np.pi * k / self.period

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.a0)
        for k, ak in enumerate(self.a, start=1):
            if ak:
                out = out + ak * np.cos(self._freq(k) * x)
        for k, bk in enumerate(self.b, start=1):
            if bk:
                out = out + bk * np.sin(self._freq(k) * x)
        return out

    def derivative(self) -> "FourierSeries":
        n = max(len(self.a), len(self.b))
        a = list(self.a) + [0.0] * (n - len(self.a))
        b = list(self.b) + [0.0] * (n - len(self.b))
        da = [b[k - 1] * self._freq(k) for k in range(1, n + 1)]
        db = [-a[k - 1] * self._freq(k) for k in range(1, n + 1)]
        return FourierSeries(self.period, 0.0, tuple(da), tuple(db))

    @property
    def is_constant(self):
        return not any(self.a) and not any(self.b)

    def to_config(self):
        if self.is_constant:
            return self.a0
        return {"fourier": {"a0": self.a0, "a": list(self.a), "b": list(self.b)}}


@dataclass(frozen=True)
class MathieuPotential:
    """``q(x) = 2 r cos 2x``."""

    r: float

    def __call__(self, x):
        return 2 * self.r * np.cos(2 * np.asarray(x, dtype=float))

    def to_config(self):
        return {"builtin": "mathieu", "r": self.r}


@dataclass(frozen=True)
class SampledPotential:
    """Periodic cubic-spline interpolant of samples on a grid (used for partner potentials)."""

    nodes: np.ndarray = field(repr=False, compare=False)
    values: np.ndarray = field(repr=False, compare=False)

    @cached_property
    def _spline(self):
        from scipy.interpolate import CubicSpline

        y = np.array(self.values, dtype=float)
        y[0] = y[-1] = 0.5 * (y[0] + y[-1])
        return CubicSpline(np.asarray(self.nodes, dtype=float), y, bc_type="periodic")

    def __call__(self, x):
        period = float(self.nodes[-1])
        return self._spline(np.mod(np.asarray(x, dtype=float), period))

    def to_config(self):
        raise ProblemError("sampled potentials have no configuration form")


def _constant(c: float, period: float) -> FourierSeries:
    return FourierSeries(period, float(c))


@dataclass(frozen=True)
class SLProblem:
    """Periodic Sturm-Liouville data ``(p, q, period)`` sampled on a uniform grid.

    ``p`` and ``q`` are vectorized callables.  ``p_prime`` is optional; when it
    is missing and ``p`` is a :class:`FourierSeries` the analytic derivative is
    used, otherwise derivatives of ``p`` come from periodic centered differences.
    Construction validates positivity of ``p``, finiteness, a jump heuristic
    (``|neighbour difference| <= jump_slope * h``) and periodicity.
    """

    p: Callable
    q: Callable
    period: float
    p_prime: Optional[Callable] = None
    name: str = "custom"
    n_points: int = DEFAULT_POINTS
    jump_slope: float = 1e4

    def __post_init__(self):
        grid = make_grid(self.period, self.n_points)
        object.__setattr__(self, "grid", grid)
        try:
            p = sample(self.p, grid)
            q = sample(self.q, grid)
        except ValueError as exc:
            raise ProblemError(str(exc)) from exc
        if np.iscomplexobj(p.values) or np.iscomplexobj(q.values):
            raise ProblemError("p and q must be real")
        if np.any(p.values <= 0):
            i = int(np.argmax(p.values <= 0))
            raise ProblemError(f"p must be positive, p({grid.nodes[i]!r}) = {p.values[i]!r}")
        h = grid.step
        for label, gf in (("p", p), ("q", q)):
            v = gf.values
            if np.max(np.abs(np.diff(v)), initial=0.0) > self.jump_slope * h:
                raise ProblemError(f"{label} looks discontinuous on the grid")
            if abs(v[-1] - v[0]) > PERIODICITY_TOL * max(1.0, float(np.max(np.abs(v)))):
                raise ProblemError(f"{label} is not periodic: {label}(0)={v[0]!r}, {label}(T)={v[-1]!r}")
        object.__setattr__(self, "p_values", p)
        object.__setattr__(self, "q_values", q)

    @property
    def T(self) -> float:
        return self.period

    def with_grid(self, n_points: int) -> "SLProblem":
        return dataclasses.replace(self, n_points=int(n_points))

    def with_potential(self, q: Callable, name: str) -> "SLProblem":
        return dataclasses.replace(self, q=q, name=name)

    @cached_property
    def p_prime_values(self) -> np.ndarray:
        if self.p_prime is not None:
            return sample(self.p_prime, self.grid).values.astype(float)
        if isinstance(self.p, FourierSeries):
            return self.p.derivative()(self.grid.nodes)
        return periodic_gradient(self.p_values.values.astype(float), self.grid.step)

    @cached_property
    def sqrt_p(self) -> np.ndarray:
        return np.sqrt(self.p_values.values.astype(float))

    @cached_property
    def sqrt_p_prime(self) -> np.ndarray:
        """``(p^{1/2})' = p' / (2 p^{1/2})``."""
        return self.p_prime_values / (2 * self.sqrt_p)

    @cached_property
    def sqrt_p_second(self) -> np.ndarray:
        """``(p^{1/2})''`` by periodic differences of ``(p^{1/2})'``."""
        if isinstance(self.p, FourierSeries) and self.p.is_constant:
            return np.zeros(self.n_points)
        return periodic_gradient(self.sqrt_p_prime, self.grid.step)

    def to_config(self) -> str:
        """YAML document that :func:`from_config` maps back to this problem."""
        doc = {"name": self.name, "T": float(self.period)}
        for label, coef in (("p", self.p), ("q", self.q)):
            if not hasattr(coef, "to_config"):
                raise ProblemError(f"{label} has no configuration form")
            doc[label] = coef.to_config()
        return yaml.safe_dump(doc, sort_keys=False)


def mathieu(r: float, n_points: int = DEFAULT_POINTS) -> SLProblem:
    """Mathieu problem ``p = 1``, ``q = 2 r cos 2x`` on ``[0, pi]``."""
    r = float(r)
    if not np.isfinite(r):
        raise ProblemError("Mathieu parameter must be finite")
    return SLProblem(_constant(1.0, np.pi), MathieuPotential(r), np.pi,
                     name=f"mathieu(r={r:g})", n_points=n_points)


def constant_problem(p0: float, q0: float, T: float, n_points: int = DEFAULT_POINTS) -> SLProblem:
    """Constant coefficients; for ``p0 = 1`` the discriminant is ``2 cos(sqrt(lambda - q0) T)``."""
    if not p0 > 0:
        raise ProblemError(f"p0 must be positive, got {p0!r}")
    if not T > 0:
        raise ProblemError(f"T must be positive, got {T!r}")
    return SLProblem(_constant(p0, T), _constant(q0, T), float(T),
                     name=f"constant(p={p0:g}, q={q0:g})", n_points=n_points)


def free_problem(n_points: int = DEFAULT_POINTS) -> SLProblem:
    """``p = 1, q = 0`` on ``[0, pi]``."""
    prob = constant_problem(1.0, 0.0, np.pi, n_points)
    return dataclasses.replace(prob, name="free")


def _coefficient(doc: dict, label: str, period: float):
    fourier_key = f"{label}_fourier"
    if fourier_key in doc and label in doc:
        raise ProblemError(f"give either {label} or {fourier_key}, not both")
    if fourier_key in doc:
        return _fourier(doc[fourier_key], period, fourier_key)
    spec = doc.get(label, 1.0 if label == "p" else 0.0)
    if isinstance(spec, bool):
        raise ProblemError(f"{label}: expected a number or mapping")
    if isinstance(spec, (int, float)):
        return _constant(float(spec), period)
    if isinstance(spec, str):
        spec = {"builtin": spec}
    if not isinstance(spec, dict):
        raise ProblemError(f"{label}: expected a number or mapping, got {type(spec).__name__}")
    if "fourier" in spec:
        return _fourier(spec["fourier"], period, label)
    if spec.get("builtin") == "mathieu":
        if label != "q":
            raise ProblemError("the mathieu built-in is a potential (q)")
        try:
            return MathieuPotential(float(spec["r"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError("mathieu potential needs a numeric r") from exc
    if "constant" in spec:
        return _constant(_num(spec["constant"], label), period)
    raise ProblemError(f"{label}: unrecognised coefficient {spec!r}")


def _num(value, where):
    if isinstance(value, bool):
        raise ProblemError(f"{where}: expected a number")
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"{where}: expected a number, got {value!r}") from exc


def _fourier(block, period, where):
    if not isinstance(block, dict):
        raise ProblemError(f"{where}: Fourier block must be a mapping")
    unknown = set(block) - {"a0", "a", "b"}
    if unknown:
        raise ProblemError(f"{where}: unknown Fourier keys {sorted(unknown)}")
    a = block.get("a") or []
    b = block.get("b") or []
    if not isinstance(a, list) or not isinstance(b, list):
        raise ProblemError(f"{where}: a and b must be lists")
    return FourierSeries(period, _num(block.get("a0", 0.0), where),
                         tuple(_num(v, where) for v in a), tuple(_num(v, where) for v in b))


def from_config(text: str, n_points: int = DEFAULT_POINTS) -> SLProblem:
    """Parse a YAML problem document (schema in the module docstring)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ProblemError(f"malformed configuration: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemError("configuration must be a mapping")
    builtin = doc.get("builtin")
    if builtin is not None:
        if builtin == "mathieu":
            if "r" not in doc:
                raise ProblemError("builtin mathieu needs r")
            prob = mathieu(_num(doc["r"], "r"), n_points)
        elif builtin == "free":
            prob = free_problem(n_points)
        else:
            raise ProblemError(f"unknown builtin {builtin!r}")
        if "name" in doc:
            prob = dataclasses.replace(prob, name=str(doc["name"]))
        return prob
    if "T" not in doc:
        raise ProblemError("configuration needs a period T")
    period = _num(doc["T"], "T")
    if not period > 0:
        raise ProblemError("T must be positive")
    p = _coefficient(doc, "p", period)
    q = _coefficient(doc, "q", period)
    return SLProblem(p, q, period, name=str(doc.get("name", "config")), n_points=n_points)


def load_config(path, n_points: int = DEFAULT_POINTS) -> SLProblem:
    with open(path, encoding="utf-8") as fh:
        return from_config(fh.read(), n_points)


def ode_oracle(problem: SLProblem, lam: float, rtol: float = 1e-11, atol: float = 1e-13):
    """Endpoint values ``(f1(T), f1'(T), f2(T), f2'(T))`` by adaptive Runge-Kutta.

    Integrates ``u' = v/p, v' = (q - lambda) u`` with ``v = p u'`` for both
    normalized solutions using DOP853; independent of the SPPS code path.
    """
    p, q = problem.p, problem.q
    lam = float(lam)

    def rhs(x, y):
        px = float(p(x))
        w = float(q(x)) - lam
        return [y[1] / px, w * y[0], y[3] / px, w * y[2]]

    p0 = float(p(0.0))
    sol = solve_ivp(rhs, (0.0, problem.period), [1.0, 0.0, 0.0, p0],
                    method="DOP853", rtol=rtol, atol=atol)
    if sol.status != 0:
        raise OracleError(f"reference integration failed at lambda={lam}: {sol.message}")
    u1, v1, u2, v2 = sol.y[:, -1]
    pT = float(p(problem.period))
    return float(u1), float(v1 / pT), float(u2), float(v2 / pT)


def oracle_discriminant(problem: SLProblem, lam: float) -> float:
    """``f1(T) + f2'(T)`` from :func:`ode_oracle`."""
    f1, _, _, f2p = ode_oracle(problem, lam)
    return f1 + f2p
