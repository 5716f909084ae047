"""Unconstrained (noisy) recovery: DCA outer loop with an ADMM inner loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .config import InnerStallError, RecoveryResult, SolverConfig
from .noisefree import rel_change
from .problems import MeasurementProblem
from .regularizer import dca_linearization, eval_ratio, shrink

log = logging.getLogger(__name__)


@dataclass
class AdmmState:
    x: np.ndarray
    z: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "AdmmState":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))

    def copy(self) -> "AdmmState":
        return AdmmState(self.x.copy(), self.z.copy(), self.v.copy())


def adaptive_lambda(m: int, n: int) -> float:
    if not 0 < m <= n:
        raise ValueError("need 0 < m <= n")
    return max(m**2 / n**2 - 0.1, 1e-4)


def admm_steps(A, F_reg, Atb, y, alpha: float, delta: float, state: AdmmState,
               max_iter: int, tol: float, rule: str = "change",
               box: float | None = None) -> tuple[AdmmState, bool]:
    """Scaled ADMM on ``alpha ||z||_1 + 0.5 ||A x - b||^2 - <z, y>`` with ``x = z``.

    ``rule="change"`` stops on the relative change of x between steps;
    ``rule="residual"`` on the primal and dual residuals.
    Returns the updated state and whether the tolerance was met.
    """
    x, z, v = state.x, state.z, state.v
    shift = y / delta
    thresh = alpha / delta
    for _ in range(max_iter):
        x_old, z_old = x, z
        x = linalg.ridge_apply(A, F_reg, delta, Atb + delta * (z - v))
        z = shrink(x + v + shift, thresh)
        if box is not None:
            np.clip(z, -box, box, out=z)
        v = v + x - z
        if rule == "change":
            done = rel_change(x, x_old) < tol
        else:
            scale = max(1.0, np.linalg.norm(x))
            done = (np.linalg.norm(x - z) / scale < tol
                    and delta * np.linalg.norm(z - z_old) / scale < tol)
        if done:
            return AdmmState(x, z, v), True
    return AdmmState(x, z, v), False


def solve_lasso_admm(problem: MeasurementProblem, lam1: float, cfg: SolverConfig | None = None,
                     F_reg=None) -> RecoveryResult:
    """``min lam1 ||x||_1 + 0.5 ||A x - b||^2``; returns the sparse ADMM variable z."""
    if not lam1 > 0:
        raise ValueError("lam1 must be positive")
    cfg = cfg or SolverConfig()
    A, b = problem.A, problem.b
    n = A.shape[1]
    F_reg = F_reg or linalg.factor_regularized_gram(A, cfg.delta)
    state, ok = admm_steps(A, F_reg, A.T @ b, np.zeros(n), lam1, cfg.delta, AdmmState.zeros(n),
                           cfg.lasso_max, cfg.tol_inner, rule="residual")
    if not ok:
        raise InnerStallError("lasso ADMM did not converge",
                              np.linalg.norm(state.x - state.z), np.nan)
    x = state.z.copy()
    obj = lam1 * np.abs(x).sum() + 0.5 * np.sum((A @ x - b) ** 2)
    return RecoveryResult(x=x, outer_iters=0, objective_trace=[float(obj)], status="converged",
                          iterates=[x.copy()], meta={"admm_state": state, "lam1": lam1})


def dca_unconstrained(problem: MeasurementProblem, cfg: SolverConfig,
                      linearize: Callable[[np.ndarray, int], np.ndarray],
                      objective: Callable[[np.ndarray, int], float],
                      alpha: float) -> RecoveryResult:
    """DCA for ``alpha ||x||_1 + 0.5 ||A x - b||^2 - H(x)`` from the lasso start.

    The inner ADMM state (x, z, v) starts per ``cfg.inner_start`` and carries
    over between outer iterations.
    """
    A, b = problem.A, problem.b
    F_reg = linalg.factor_regularized_gram(A, cfg.delta)
    init = solve_lasso_admm(problem, cfg.l1_lambda(A.shape[0]), cfg, F_reg=F_reg)
    if cfg.inner_start == "lasso":
        state = init.meta["admm_state"].copy()
    else:
        state = AdmmState.zeros(A.shape[1])
    x = init.x
    res = RecoveryResult(x=x, outer_iters=0, iterates=[x.copy()], meta={"lasso_lam": init.meta["lam1"]})
    if not np.any(x):
        res.status = "degenerate"
        res.objective_trace.append(0.5 * float(b @ b))
        return res
    res.objective_trace.append(objective(x, 1))
    Atb = A.T @ b
    status = "max_iters"
    for k in range(1, cfg.outer_max + 1):
        y = linearize(x, k)
        state, _ = admm_steps(A, F_reg, Atb, y, alpha, cfg.delta, state, cfg.inner_max, cfg.tol_inner,
                              box=1.0 if cfg.box else None)
        x_new = state.z.copy()
        change = rel_change(x_new, x)
        x = x_new
        res.outer_iters = k
        res.rel_change_trace.append(change)
        res.iterates.append(x.copy())
        if not np.any(x):
            status = "degenerate"
            res.objective_trace.append(0.5 * float(b @ b))
            break
        res.objective_trace.append(objective(x, k + 1))
        if change < cfg.tol_outer:
            status = "converged"
            break
    res.x = x
    res.status = status
    return res


def _check_lambda(problem, cfg, w_min):
    b2 = float(problem.b @ problem.b)
    n = problem.A.shape[1]
    bound = b2 / (2.0 * (np.sqrt(n) - w_min))
    if cfg.lam >= bound:
        log.warning("lambda=%g exceeds the existence bound %g", cfg.lam, bound)


def noisy_objective(A, b, lam, x, w) -> float:
    return float(lam * eval_ratio(x, w) + 0.5 * np.sum((A @ x - b) ** 2))


def solve_sorted_noisy(problem: MeasurementProblem, cfg: SolverConfig | None = None) -> RecoveryResult:
    """Sorted L1/L2 regularized least squares."""
    A, b = problem.A, problem.b
    cfg = cfg or SolverConfig.noisy(*A.shape)
    sched = cfg.schedule
    if sched.mode != "constant_half":
        s = sched.stage1
        _check_lambda(problem, cfg, np.exp(-s.r * (s.t - 1) / s.t))

    def linearize(x, k):
        return dca_linearization(x, sched.weights(x, k), cfg.alpha, cfg.lam)

    def objective(x, k):
        return noisy_objective(A, b, cfg.lam, x, sched.weights(x, k))

    return dca_unconstrained(problem, cfg, linearize, objective, cfg.alpha)
