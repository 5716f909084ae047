"""Comparison solvers built on the same DCA / LP / ADMM machinery.

Every solver has the signature ``solver(problem, setting, cfg=None)`` and
returns a :class:`RecoveryResult`; :data:`SOLVERS` maps the CLI names.
"""
from __future__ import annotations

from typing import Callable, Literal

import numpy as np

from .config import RecoveryResult, SolverConfig
from .noisefree import dca_constrained, solve_l1_basis_pursuit, solve_sorted_noisefree
from .noisy import dca_unconstrained, solve_lasso_admm, solve_sorted_noisy
from .problems import MeasurementProblem
from .regularizer import WeightSchedule

Setting = Literal["noisefree", "noisy"]


def default_config(setting: Setting, m: int, n: int) -> SolverConfig:
    return SolverConfig.noisefree() if setting == "noisefree" else SolverConfig.noisy(m, n)


def l1l2_config(setting: Setting, m: int, n: int) -> SolverConfig:
    if setting == "noisefree":
        return SolverConfig.noisefree(schedule=WeightSchedule.constant_half())
    return SolverConfig.noisy(m, n, lam=0.06, alpha=0.05, delta=0.9,
                              schedule=WeightSchedule.constant_half())


def solve_l1(problem: MeasurementProblem, setting: Setting, cfg: SolverConfig | None = None) -> RecoveryResult:
    m, n = problem.shape
    cfg = cfg or default_config(setting, m, n)
    if setting == "noisefree":
        return solve_l1_basis_pursuit(problem, cfg)
    return solve_lasso_admm(problem, cfg.l1_lambda(m), cfg)


def solve_sorted(problem: MeasurementProblem, setting: Setting, cfg: SolverConfig | None = None) -> RecoveryResult:
    if setting == "noisefree":
        return solve_sorted_noisefree(problem, cfg)
    return solve_sorted_noisy(problem, cfg)


def solve_l1l2_ratio(problem: MeasurementProblem, setting: Setting, cfg: SolverConfig | None = None) -> RecoveryResult:
    """Plain L1/L2: the sorted solver with every weight fixed at 1/2."""
    m, n = problem.shape
    if cfg is None:
        cfg = l1l2_config(setting, m, n)
    else:
        cfg = cfg.replace(schedule=WeightSchedule.constant_half())
    return solve_sorted(problem, setting, cfg)


def l1_minus_l2_linearization(x, weight: float = 1.0) -> np.ndarray:
    return weight * x / np.linalg.norm(x)


def solve_l1_minus_l2(problem: MeasurementProblem, setting: Setting, cfg: SolverConfig | None = None) -> RecoveryResult:
    """DCA for ``||x||_1 - ||x||_2`` with ``y^k = x^k / ||x^k||_2``.

    Noise-free: ``min ||x||_1 - <x, y>  s.t.  A x = b``.  Noisy: the penalty
    carries the L1 weight ``0.1 m / 270`` (or ``cfg.lasso_lam``).
    """
    m, n = problem.shape
    cfg = cfg or default_config(setting, m, n)
    if setting == "noisefree":
        def linearize(x, k):
            return l1_minus_l2_linearization(x)

        def objective(x, k):
            return float(np.abs(x).sum() - np.linalg.norm(x))

        res = dca_constrained(problem, cfg, linearize, objective, 1.0)
        return res

    lam = cfg.l1_lambda(m)
    A, b = problem.A, problem.b

    def linearize(x, k):
        return l1_minus_l2_linearization(x, lam)

    def objective(x, k):
        return float(lam * (np.abs(x).sum() - np.linalg.norm(x)) + 0.5 * np.sum((A @ x - b) ** 2))

    res = dca_unconstrained(problem, cfg, linearize, objective, lam)
    res.meta["l1_minus_l2_lambda"] = lam
    return res


SOLVERS: dict[str, Callable[..., RecoveryResult]] = {
    "l1": solve_l1,
    "l1l2": solve_l1l2_ratio,
    "l1-l2": solve_l1_minus_l2,
    "sorted": solve_sorted,
}


def get_solver(name: str) -> Callable[..., RecoveryResult]:
    try:
        return SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
