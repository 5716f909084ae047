"""Constrained (noise-free) recovery: DCA outer loop with LP or ADMM subproblems."""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import linalg
from .config import InfeasibleConstraintError, InnerStallError, RecoveryResult, SolverConfig
from .lp import LpBasis, build_split_lp, solve_bounded_lp, split_to_signed
from .problems import MeasurementProblem
from .regularizer import dca_linearization, eval_ratio, shrink


def rel_change(x_new, x_old) -> float:
    nrm = np.linalg.norm(x_new)
    diff = np.linalg.norm(x_new - x_old)
    if nrm == 0:
        return 0.0 if diff == 0 else np.inf
    return float(diff / nrm)


class _LpRoute:
    """Split-LP subproblem solver that warm starts from the previous basis."""

    def __init__(self, A, b, box: bool):
        self.A, self.b = A, b
        self.box = 1.0 if box else _box_free_bound(A, b)
        self.basis: LpBasis | None = None

    def __call__(self, y, alpha):
        p = build_split_lp(self.A, self.b, y, alpha, box=self.box)
        sol = solve_bounded_lp(p, warm_start=self.basis)
        if sol.status != "optimal":
            raise InfeasibleConstraintError("A x = b has no solution within the box")
        self.basis = sol.basis
        return split_to_signed(sol.x)


def _box_free_bound(A, b) -> float:
    # Box off: a loose bound keeps the LP bounded without binding at typical scales.
    x_ln = np.linalg.lstsq(A, b, rcond=None)[0]
    return 1e3 * max(1.0, float(np.max(np.abs(x_ln))))


class _AdmmRoute:
    def __init__(self, A, b, cfg: SolverConfig):
        self.A, self.b, self.cfg = A, b, cfg
        self.F = linalg.factor_gram(A)
        self.state = None

    def __call__(self, y, alpha):
        x, self.state = solve_subproblem_admm(self.A, self.F, self.b, y, self.cfg.replace(alpha=alpha),
                                              state=self.state, return_state=True)
        return x


def solve_subproblem_admm(A, F_AAt, b, y, cfg: SolverConfig, state=None, return_state=False,
                          max_iter: int | None = None, tol: float | None = None):
    """ADMM for ``min alpha ||x||_1 - <x, y>  s.t.  A x = b`` (and ``|x| <= 1`` if ``cfg.box``).

    Splitting ``x = z`` with ``x`` carrying the affine constraint; ``z`` the
    separable part.  ``state`` is an optional ``(z, v)`` warm start.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n = A.shape[1]
    delta, alpha = cfg.delta, cfg.alpha
    max_iter = cfg.admm_max if max_iter is None else max_iter
    tol = cfg.tol_inner if tol is None else tol
    if state is None:
        z = linalg.affine_project(A, F_AAt, b, np.zeros(n))
        v = np.zeros(n)
    else:
        z, v = (np.array(s, dtype=float) for s in state)
    r_pri = r_dual = np.inf
    for _ in range(max_iter):
        x = linalg.affine_project(A, F_AAt, b, z - v)
        z_old = z
        z = shrink(x + v + y / delta, alpha / delta)
        if cfg.box:
            np.clip(z, -1.0, 1.0, out=z)
        v = v + x - z
        scale = max(1.0, np.linalg.norm(x))
        r_pri = np.linalg.norm(x - z) / scale
        r_dual = delta * np.linalg.norm(z - z_old) / scale
        if r_pri < tol and r_dual < tol:
            break
    else:
        raise InnerStallError("ADMM subproblem did not converge", r_pri, r_dual)
    x = linalg.affine_project(A, F_AAt, b, z)
    return (x, (z, v)) if return_state else x


def solve_l1_basis_pursuit(problem: MeasurementProblem, cfg: SolverConfig | None = None) -> RecoveryResult:
    """``min ||x||_1  s.t.  A x = b`` (within the box when enabled) via one split LP."""
    cfg = cfg or SolverConfig.noisefree()
    A, b = problem.A, problem.b
    route = _LpRoute(A, b, cfg.box)
    x = route(np.zeros(A.shape[1]), 1.0)
    return RecoveryResult(x=x, outer_iters=0, objective_trace=[float(np.abs(x).sum())],
                          status="converged", iterates=[x.copy()], meta={"lp_basis": route.basis})


def dca_constrained(problem: MeasurementProblem, cfg: SolverConfig,
                    linearize: Callable[[np.ndarray, int], np.ndarray],
                    objective: Callable[[np.ndarray, int], float],
                    alpha: float) -> RecoveryResult:
    """Generic DCA for ``G(x) = alpha ||x||_1 + I(Ax = b)`` minus a linearized ``H``.

    ``linearize(x, k)`` returns y^k; ``objective(x, k)`` the value recorded
    in the trace.  Starts from basis pursuit.
    """
    A, b = problem.A, problem.b
    if cfg.subproblem == "lp":
        route = _LpRoute(A, b, cfg.box)
    else:
        route = _AdmmRoute(A, b, cfg)
    x = route(np.zeros(A.shape[1]), 1.0)
    res = RecoveryResult(x=x, outer_iters=0, iterates=[x.copy()])
    if not np.any(x):
        res.status = "degenerate"
        res.objective_trace.append(0.0)
        return res
    res.objective_trace.append(objective(x, 1))
    status = "max_iters"
    for k in range(1, cfg.outer_max + 1):
        y = linearize(x, k)
        x_new = route(y, alpha)
        change = rel_change(x_new, x)
        x = x_new
        res.outer_iters = k
        res.rel_change_trace.append(change)
        res.iterates.append(x.copy())
        if not np.any(x):
            status = "degenerate"
            res.objective_trace.append(0.0)
            break
        res.objective_trace.append(objective(x, k + 1))
        if change < cfg.tol_outer:
            status = "converged"
            break
    res.x = x
    res.status = status
    return res


def solve_sorted_noisefree(problem: MeasurementProblem, cfg: SolverConfig | None = None) -> RecoveryResult:
    """Sorted L1/L2 minimization subject to ``A x = b``.

    Weights are rebuilt from each iterate according to ``cfg.schedule``.
    """
    cfg = cfg or SolverConfig.noisefree()
    sched = cfg.schedule

    def linearize(x, k):
        return dca_linearization(x, sched.weights(x, k), cfg.alpha, cfg.lam)

    def objective(x, k):
        return eval_ratio(x, sched.weights(x, k))

    return dca_constrained(problem, cfg, linearize, objective, cfg.alpha)
