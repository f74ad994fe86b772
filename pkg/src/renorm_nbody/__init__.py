"""Time-renormalized integration of the gravitational N-body problem.

The package provides the N-body vector field and its time-renormalized forms
``s0 .. s4``, Taylor-series (jet) integration, an embedded Runge-Kutta 9(8)
engine, the radius-of-convergence bound ``1/L`` with the constants of the
uniform analyticity strip, and experiment pipelines with a command-line front
end.
"""
from .bounds import (LAMBDA0, BoundsReport, ConstantsReport, L_bound, aux_lambda_functions,
                     compute_constants, conformal_map, conformal_map_inverse, eta, sL_product)
from .dynamics import (PhaseState, SystemSpec, accelerations, energies, min_separation, pairwise_K,
                       total_momentum)
from .errors import (CollisionError, ConvergenceError, DomainError, EstimateError, InvariantError,
                     MaxStepsError, ParseError, RenormError, StepWarning)
from .experiments import ReportRow, compare, radius_scan, strip_width
from .integrators import IntegratorConfig, Trajectory, integrate, reference_solution, rk_step, taylor_step
from .problems import ProblemFile, gen_binary_visitor, gen_pythagorean, load_problem, save_problem
from .renorm import S0, S1, S2, S3, S4, RenormChoice, renormalized_rhs, s_value
from .series import PowerSeries, SeriesBundle, radius_estimate, series_arith, taylor_coeffs
from .tableau import ButcherTableau, load_tableau, parse_tableau, verner98

__version__ = "0.1.0"

__all__ = [
    "LAMBDA0", "BoundsReport", "ConstantsReport", "L_bound", "aux_lambda_functions", "compute_constants",
    "conformal_map", "conformal_map_inverse", "eta", "sL_product",
    "PhaseState", "SystemSpec", "accelerations", "energies", "min_separation", "pairwise_K",
    "total_momentum",
    "CollisionError", "ConvergenceError", "DomainError", "EstimateError", "InvariantError",
    "MaxStepsError", "ParseError", "RenormError", "StepWarning",
    "ReportRow", "compare", "radius_scan", "strip_width",
    "IntegratorConfig", "Trajectory", "integrate", "reference_solution", "rk_step", "taylor_step",
    "ProblemFile", "gen_binary_visitor", "gen_pythagorean", "load_problem", "save_problem",
    "S0", "S1", "S2", "S3", "S4", "RenormChoice", "renormalized_rhs", "s_value",
    "PowerSeries", "SeriesBundle", "radius_estimate", "series_arith", "taylor_coeffs",
    "ButcherTableau", "load_tableau", "parse_tableau", "verner98",
]
