"""Exception types raised by hillspps."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class NearZeroDivisorError(ArithmeticError):
    """A reciprocal was requested of a sample that is (numerically) zero."""


class NodalSolutionError(NearZeroDivisorError):
    """A generating solution has a zero on the period, so it cannot seed SPPS."""


class ProblemError(ValueError):
    """Invalid problem data or malformed problem configuration."""


class NotBandEdgeError(ValueError):
    """The spectral parameter is not a periodic band edge."""


class DegenerateError(ArithmeticError):
    """A construction breaks down at a degenerate (coexistence) point."""


class SeriesBudgetError(ArithmeticError):
    """A truncated power series was evaluated outside its validated range.

    Attributes
    ----------
    lam : float
        The spectral parameter at which the tail test failed.
    partial : list
        Results gathered before the failure (may be empty).
    """

    def __init__(self, message, lam=None, partial=None):
        super().__init__(message)
        self.lam = lam
        self.partial = list(partial or [])


class NoSignChangeError(RuntimeError):
    """A root scan found no bracketing sign change."""


class VerificationError(RuntimeError):
    """A built-in consistency check (factorization, invariance, involution) failed."""


class OracleError(RuntimeError):
    """The reference ODE integration did not complete."""
