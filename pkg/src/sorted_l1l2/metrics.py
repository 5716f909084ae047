"""Recovery metrics: relative error, MSE, support scores, OLS oracle."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .regularizer import magnitude_order

SUCCESS_THRESHOLD = 1e-3


def relative_error(x, x_true) -> float:
    x_true = np.asarray(x_true, dtype=float)
    nrm = np.linalg.norm(x_true)
    if nrm == 0:
        raise ValueError("relative error undefined for a zero reference")
    return float(np.linalg.norm(np.asarray(x, dtype=float) - x_true) / nrm)


def mse(x, x_true) -> float:
    """Mean squared error per entry, ``||x - x_true||^2 / n``."""
    x = np.asarray(x, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x.shape != x_true.shape:
        raise ValueError("length mismatch")
    return float(np.sum((x - x_true) ** 2) / x.size)


def is_success(rel_err: float) -> bool:
    return bool(rel_err < SUCCESS_THRESHOLD)


def default_zero_tol(x) -> float:
    return 1e-6 * float(np.max(np.abs(x), initial=0.0))


def support_scores(x, x_true, zero_tol: float | None = None) -> tuple[float, float]:
    """(recall, precision) of ``{|x_i| > zero_tol}`` against the true support."""
    x = np.asarray(x, dtype=float)
    if zero_tol is None:
        zero_tol = default_zero_tol(x)
    true = np.asarray(x_true) != 0
    est = np.abs(x) > zero_tol
    hit = np.count_nonzero(true & est)
    recall = hit / np.count_nonzero(true)
    n_est = np.count_nonzero(est)
    precision = hit / n_est if n_est else 0.0
    return float(recall), float(precision)


def topk_hit_rate(x, x_true) -> float:
    """Fraction of the true support among the k largest |x_i|, k = ||x_true||_0."""
    true = np.flatnonzero(np.asarray(x_true))
    k = true.size
    top = magnitude_order(x)[:k]
    return float(np.intersect1d(top, true).size / k)


def oracle_ols_mse(A, support, sigma: float) -> float:
    """Least-squares risk with the true support known: ``sigma^2 tr((A_S^T A_S)^{-1})``."""
    A_S = np.asarray(A, dtype=float)[:, np.asarray(support)]
    G = A_S.T @ A_S
    if np.linalg.matrix_rank(G) < G.shape[0]:
        raise np.linalg.LinAlgError("A_S is rank deficient")
    return float(sigma**2 * np.trace(np.linalg.inv(G)))


@dataclass
class TrialRecord:
    solver: str
    matrix_kind: str
    coherence_param: float
    m: int
    n: int
    sparsity: int
    seed: int
    rel_err: float
    mse: float
    success: bool
    recall: float
    precision: float
    topk_hit: float
    outer_iters: int
    wall_time_ms: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def evaluate(cls, solver, spec, x, x_true, outer_iters, wall_time_ms) -> "TrialRecord":
        rel = relative_error(x, x_true)
        recall, precision = support_scores(x, x_true)
        return cls(
            solver=solver,
            matrix_kind=spec.matrix_kind,
            coherence_param=spec.coherence_param,
            m=spec.m,
            n=spec.n,
            sparsity=spec.sparsity,
            seed=spec.seed,
            rel_err=rel,
            mse=mse(x, x_true),
            success=is_success(rel),
            recall=recall,
            precision=precision,
            topk_hit=topk_hit_rate(x, x_true),
            outer_iters=outer_iters,
            wall_time_ms=wall_time_ms,
        )
