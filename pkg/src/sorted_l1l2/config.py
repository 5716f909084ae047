"""Solver configuration and result containers."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .regularizer import WeightSchedule


class InnerStallError(RuntimeError):
    """An inner ADMM loop hit its iteration cap before reaching tolerance."""

    def __init__(self, msg, primal_residual=np.nan, dual_residual=np.nan):
        super().__init__(f"{msg} (primal {primal_residual:.3e}, dual {dual_residual:.3e})")
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual


class InfeasibleConstraintError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    lam: float = 1.0
    delta: float = 0.8
    outer_max: int = 100
    inner_max: int = 20
    tol_outer: float = 1e-8
    tol_inner: float = 1e-6
    subproblem: Literal["lp", "admm"] = "lp"
    box: bool = True
    schedule: WeightSchedule = field(default_factory=WeightSchedule.noisefree)
    # cap for the exact-constraint ADMM subproblem route
    admm_max: int = 2000
    lasso_max: int = 5000
    # lambda of the L1 initializer in the noisy setting; None means 0.1 m / 270
    lasso_lam: float | None = None
    # noisy inner ADMM (z, v) at the first outer step: zeros, or the lasso's final state
    inner_start: Literal["zero", "lasso"] = "zero"

    def __post_init__(self):
        for name in ("alpha", "lam", "delta", "tol_outer", "tol_inner"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.outer_max < 1 or self.inner_max < 1:
            raise ValueError("iteration caps must be positive")
        if self.subproblem not in ("lp", "admm"):
            raise ValueError(f"unknown subproblem solver {self.subproblem!r}")
        if self.inner_start not in ("zero", "lasso"):
            raise ValueError(f"unknown inner_start {self.inner_start!r}")

    @classmethod
    def noisefree(cls, **kw) -> "SolverConfig":
        return cls(**kw)

    @classmethod
    def noisy(cls, m: int, n: int, **kw) -> "SolverConfig":
        from .noisy import adaptive_lambda

        base = dict(alpha=0.1, lam=adaptive_lambda(m, n), delta=0.8, tol_outer=1e-6,
                    schedule=WeightSchedule.noisy())
        base.update(kw)
        return cls(**base)

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)

    def l1_lambda(self, m: int) -> float:
        return self.lasso_lam if self.lasso_lam is not None else 0.1 * m / 270


@dataclass
class RecoveryResult:
    """Final iterate plus per-iteration traces.

    ``rel_change_trace[k]`` is the relative change produced by outer step k;
    ``objective_trace`` and ``iterates`` also include the initial point, so
    they are one longer.
    """

    x: np.ndarray
    outer_iters: int
    objective_trace: list[float] = field(default_factory=list)
    rel_change_trace: list[float] = field(default_factory=list)
    status: Literal["converged", "max_iters", "degenerate"] = "converged"
    iterates: list[np.ndarray] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
