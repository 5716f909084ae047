"""Sorted L1/L2 sparse recovery.

Rank-weighted L1/L2 penalty with DCA solvers for the constrained
(noise-free) and regularized least-squares (noisy) models, comparison
baselines, seeded problem generators and an experiment CLI.
"""
from .baselines import SOLVERS, get_solver
from .config import RecoveryResult, SolverConfig
from .metrics import TrialRecord
from .noisefree import solve_sorted_noisefree
from .noisy import solve_sorted_noisy
from .problems import MeasurementProblem, ProblemSpec, make_problem
from .regularizer import WeightSchedule, build_weights, dca_linearization, eval_ratio

__all__ = [
    "SOLVERS",
    "MeasurementProblem",
    "ProblemSpec",
    "RecoveryResult",
    "SolverConfig",
    "TrialRecord",
    "WeightSchedule",
    "build_weights",
    "dca_linearization",
    "eval_ratio",
    "get_solver",
    "make_problem",
    "solve_sorted_noisefree",
    "solve_sorted_noisy",
]
