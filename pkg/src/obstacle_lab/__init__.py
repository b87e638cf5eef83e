"""Numerical laboratory for the obstacle problem with C^{1,beta} obstacles.

Includes a grid PSOR solver with a radial reference solver, the monotone
quantity A(R, u), and blow-up classification."""

from .blowup import BlowupReport, Thresholds, classify, homogeneity_deviation, rescale, verify_scaling_identity
from .errors import (ConfigError, ConvergenceError, InadmissibleDataError, ObstacleLabError, OutOfDomainError,
                     RadiusError)
from .grid import (GridSpec, ScalarField, ball_integral, dirichlet_energy, gradient_at, sample,
                   sphere_integral)
from .obstacles import BoundaryData, Modulation, ObstacleSpec, eval_obstacle, verify_scaling_inequality
from .radial import RadialProblem, matching_radius, matching_solution, solve_radial
from .solver import ProblemSpec, SolveResult, ball_mode_solve, complementarity_residual, solve
from .weiss import A_value, MonotoneProfile, cone_extension, drift, energy_identity_check, profile

__version__ = "0.1.0"
