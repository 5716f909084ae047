"""Dense linear-algebra kernels and cached SPD factorizations.

Matrices are plain 2-D ``numpy`` arrays.  The only stateful object is
:class:`SpdFactor`, an immutable Cholesky factor that the solvers build
once per problem and reuse across every iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

SYMMETRY_TOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, pivot: int):
        super().__init__(f"matrix is not positive definite (pivot {pivot})")
        self.pivot = pivot


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def matvec(M, v) -> np.ndarray:
    M = _as_matrix(M)
    v = np.asarray(v, dtype=float)
    if v.shape != (M.shape[1],):
        raise ValueError(f"dimension mismatch: {M.shape} @ {v.shape}")
    return M @ v


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor ``L`` with ``L @ L.T`` equal to the factored matrix."""

    L: np.ndarray

    @property
    def dim(self) -> int:
        return self.L.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.L @ self.L.T


def cholesky_spd(M) -> SpdFactor:
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    L, info = lapack.dpotrf(M, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    L.setflags(write=False)
    return SpdFactor(L)


def spd_solve(F: SpdFactor, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != F.dim:
        raise ValueError(f"dimension mismatch: factor {F.dim}, rhs {rhs.shape}")
    y = solve_triangular(F.L, rhs, lower=True, check_finite=False)
    return solve_triangular(F.L, y, lower=True, trans="T", check_finite=False)


def factor_gram(A) -> SpdFactor:
    """Factor ``A A^T`` (requires full row rank)."""
    A = _as_matrix(A)
    return cholesky_spd(A @ A.T)


def factor_regularized_gram(A, delta: float) -> SpdFactor:
    """Factor ``delta I + A A^T``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    A = _as_matrix(A)
    G = A @ A.T
    G[np.diag_indices_from(G)] += delta
    return cholesky_spd(G)


def affine_project(A, F_AAt: SpdFactor, b, z) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``{x : A x = b}``."""
    z = np.asarray(z, dtype=float)
    r = A @ z - b
    return z - A.T @ spd_solve(F_AAt, r)


def ridge_apply(A, F_reg: SpdFactor, delta: float, rhs) -> np.ndarray:
    """Return ``(A^T A + delta I)^{-1} rhs`` via the Woodbury identity.

    ``F_reg`` must factor ``delta I_m + A A^T``, so only an m-by-m system
    is solved per call.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    rhs = np.asarray(rhs, dtype=float)
    if F_reg.dim != A.shape[0] or rhs.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch")
    return (rhs - A.T @ spd_solve(F_reg, A @ rhs)) / delta
