"""Uniform grids over one period and the cumulative Simpson primitive.

Every recursive integral in the SPPS construction is an antiderivative
from 0 of a sampled integrand, so :func:`cumulative_simpson` is the one
quadrature routine the rest of the package relies on.  The recursions are
carried out in extended precision (``numpy.longdouble``) because the
discriminant polynomial is evaluated far from its expansion point, where
its terms cancel by many orders of magnitude.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .exceptions import GridMismatchError, NearZeroDivisorError

#: dtype used for the SPPS recursions (80-bit on x86-64 Linux)
WORKING_DTYPE = np.longdouble
#: complex counterpart of WORKING_DTYPE
COMPLEX_DTYPE = np.clongdouble

#: relative threshold below which a sample counts as zero in a reciprocal
EPS_DIV = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``0 = x_0 < ... < x_{n-1} = period`` with odd ``n_points``."""

    period: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.period) or self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period!r}")
        if int(self.n_points) != self.n_points or self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError(f"n_points must be an odd integer >= 3, got {self.n_points!r}")

    @cached_property
    def step(self) -> float:
        return self.period / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.period, self.n_points)
        x.setflags(write=False)
        return x

    def __len__(self):
        return self.n_points


def make_grid(T: float, n_points: int = 7001) -> Grid:
    """Uniform grid over ``[0, T]``."""
    return Grid(float(T), int(n_points))


class GridFunction:
    """Immutable samples of a real or complex function on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.array(values)
        if values.ndim == 0:
            values = np.full(grid.n_points, values)
        if values.shape != (grid.n_points,):
            raise ValueError(
                f"expected {grid.n_points} samples, got array of shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function has non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __repr__(self):
        return f"GridFunction(n_points={self.grid.n_points}, dtype={self.values.dtype})"

    def __len__(self):
        return self.grid.n_points

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __getitem__(self, index):
        return self.values[index]

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def start(self):
        return self.values[0]

    @property
    def end(self):
        return self.values[-1]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise GridMismatchError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GridFunction):
            return self * reciprocal(other)
        return GridFunction(self.grid, self.values / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    @property
    def real(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.real)

    @property
    def imag(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.imag)


def sample(f: Callable, grid: Grid) -> GridFunction:
    """Evaluate ``f`` at every node of ``grid``.

    ``f`` is called once with the whole node array; scalar-only callables are
    retried node by node.
    """
    x = grid.nodes
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        try:
            values = np.asarray(f(x))
            if values.shape != x.shape:
                values = np.broadcast_to(values, x.shape).copy()
        except TypeError:
            values = np.array([f(xi) for xi in x])
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"function is not finite at node x={x[i]!r}")
    return GridFunction(grid, values)


def cumulative_simpson(values: np.ndarray, step) -> np.ndarray:
    """Cumulative integral from the first sample along the last axis.

    Even-indexed nodes accumulate composite Simpson panels; each odd node
    adds the three-point half-panel rule ``h/12 (5 g0 + 8 g1 - g2)`` to the
    preceding even node.  Requires an odd number of samples.
    """
    g = np.asarray(values)
    n = g.shape[-1]
    if n < 3 or n % 2 == 0:
        raise ValueError("cumulative_simpson needs an odd number of samples >= 3")
    g0, g1, g2 = g[..., 0:-2:2], g[..., 1:-1:2], g[..., 2::2]
    out = np.zeros_like(g)
    out[..., 2::2] = np.cumsum(step / 3 * (g0 + 4 * g1 + g2), axis=-1)
    out[..., 1::2] = out[..., 0:-2:2] + step / 12 * (5 * g0 + 8 * g1 - g2)
    return out


def simpson(values: np.ndarray, step) -> float:
    """Single-shot composite Simpson integral over the whole grid."""
    g = np.asarray(values)
    return step / 3 * (g[..., 0] + g[..., -1] + 4 * g[..., 1:-1:2].sum(axis=-1)
                       + 2 * g[..., 2:-1:2].sum(axis=-1))


def antiderivative(g: GridFunction) -> GridFunction:
    """``G(x_i) = int_0^{x_i} g`` by cumulative composite Simpson."""
    step = WORKING_DTYPE(g.grid.period) / (g.grid.n_points - 1)
    vals = g.values
    if vals.dtype == WORKING_DTYPE or vals.dtype == COMPLEX_DTYPE:
        return GridFunction(g.grid, cumulative_simpson(vals, step))
    return GridFunction(g.grid, cumulative_simpson(vals, g.grid.step))


def periodic_gradient(values: np.ndarray, step) -> np.ndarray:
    """Centered first difference, wrapped across the period at both ends."""
    v = np.asarray(values)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * step)
    d[0] = d[-1] = (v[1] - v[-2]) / (2 * step)
    return d


# elementwise helpers

def multiply(a: GridFunction, b: GridFunction) -> GridFunction:
    return a * b


def scale(g: GridFunction, c) -> GridFunction:
    return GridFunction(g.grid, c * g.values)


def reciprocal(g: GridFunction, eps: float = EPS_DIV) -> GridFunction:
    """``1/g``; raises :class:`NearZeroDivisorError` if some ``|g| <= eps * max|g|``."""
    mag = np.abs(g.values)
    limit = eps * mag.max() if mag.size else 0.0
    small = mag <= limit
    if np.any(small):
        i = int(np.argmax(small))
        raise NearZeroDivisorError(
            f"near-vanishing denominator at x={g.grid.nodes[i]!r} (|value|={float(mag[i]):.3g})")
    return GridFunction(g.grid, 1 / g.values)


def sqrt(g: GridFunction) -> GridFunction:
    return GridFunction(g.grid, np.sqrt(g.values))


def combine(func: Callable, *args: GridFunction) -> GridFunction:
    """Apply ``func`` to the sample arrays of grid functions sharing one grid."""
    grid = args[0].grid
    for a in args[1:]:
        if a.grid != grid:
            raise GridMismatchError("grid functions live on different grids")
    return GridFunction(grid, func(*(a.values for a in args)))
