"""Semidefinite solvers for the covariance-fitting problem and the ANM baseline."""

from .options import DualSolution, SdpOptions, SdpSolution, SolverError
from .solvers import anm_weight, solve_anm_baseline, solve_dual, solve_primal

__all__ = [
    "SdpOptions",
    "SdpSolution",
    "DualSolution",
    "SolverError",
    "solve_primal",
    "solve_dual",
    "solve_anm_baseline",
    "anm_weight",
]
