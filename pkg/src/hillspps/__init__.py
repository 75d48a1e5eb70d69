"""Hill's discriminant of periodic Sturm-Liouville problems by spectral parameter power series."""
from .darboux import (DarbouxPartner, darboux_transform, double_darboux, factorize,
                      partner_discriminant, partner_solutions)
from .discriminant import (Bounds, DiscriminantSeries, discriminant_series, discriminant_series_star,
                           evaluate, find_lambda0, lambda0_bounds, polish_lambda0)
from .estimator import HillDiscriminant
from .exceptions import (DegenerateError, GridMismatchError, NearZeroDivisorError, NodalSolutionError,
                         NoSignChangeError, NotBandEdgeError, ProblemError, SeriesBudgetError,
                         VerificationError)
from .grid import Grid, GridFunction, antiderivative, make_grid, sample
from .problems import (SLProblem, constant_problem, free_problem, from_config, load_config, mathieu,
                       ode_oracle, oracle_discriminant)
from .spectrum import (BandStructure, BlochData, Eigenvalue, band_structure, bloch_factors,
                       bloch_solution, eigenvalues, self_matching)
from .spps import (build_main_coefficients, build_seed_coefficients, fundamental_solutions,
                   ground_state, periodic_ground_solution, seed_solutions)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
