"""Two-phase revised simplex for box-bounded linear programs.

Solves ``min c^T x  s.t.  A_eq x = b_eq,  lower <= x <= upper`` with all
bounds finite.  Phase 1 drives a set of artificial columns to zero; in
phase 2 the artificials are kept in the problem with bounds ``[0, 0]`` so
that degenerate artificial basics never need to be pivoted out.

The basis inverse is kept explicitly (M is small in this application) and
updated by an elementary row transformation per pivot; it is recomputed
from scratch every ``REFACTOR_EVERY`` pivots.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
PRICE_TOL = 1e-9
REFACTOR_EVERY = 50


class PivotLimitError(RuntimeError):
    pass


class UnboundedLpError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundedLp:
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        M, N = self.A_eq.shape
        if self.c.shape != (N,) or self.lower.shape != (N,) or self.upper.shape != (N,):
            raise ValueError("cost / bound lengths must equal the number of columns")
        if self.b_eq.shape != (M,):
            raise ValueError("b_eq length must equal the number of rows")
        if M > N:
            raise ValueError("more equality rows than variables")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("bounds must be finite")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def shape(self):
        return self.A_eq.shape


@dataclass(frozen=True)
class LpBasis:
    """Final basis, reusable as a warm start for an LP with the same feasible set."""

    basic: np.ndarray  # indices into the augmented (structural + artificial) columns
    at_upper: np.ndarray  # nonbasic status of every augmented column
    art_sign: np.ndarray


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    status: Literal["optimal", "infeasible"]
    pivots: int
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: LpBasis | None = None


class _Simplex:
    def __init__(self, p: BoundedLp, art_sign: np.ndarray):
        M, N = p.shape
        self.M, self.N = M, N
        self.p = p
        self.art_sign = art_sign
        self.A = np.hstack([p.A_eq, np.diag(art_sign)])
        self.lo = np.concatenate([p.lower, np.zeros(M)])
        self.hi = np.concatenate([p.upper, np.full(M, np.inf)])
        self.x = np.zeros(N + M)
        self.basic = np.arange(N, N + M)
        self.is_basic = np.zeros(N + M, dtype=bool)
        self.at_upper = np.zeros(N + M, dtype=bool)
        self.Binv = np.diag(art_sign).astype(float)
        self.pivots = 0
        self.max_pivots = 10 * N * M + 10 * (N + M)
        self._since_refactor = 0

    # -- basis bookkeeping -------------------------------------------------
    def set_basis(self, basic, at_upper):
        self.basic = np.array(basic, dtype=int)
        self.is_basic[:] = False
        self.is_basic[self.basic] = True
        self.at_upper = np.array(at_upper, dtype=bool)
        self.at_upper[self.basic] = False
        nb = ~self.is_basic
        self.x[nb] = np.where(self.at_upper[nb], self.hi[nb], self.lo[nb])
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basic]
        self.Binv = np.linalg.inv(B)
        nb = ~self.is_basic
        rhs = self.p.b_eq - self.A[:, nb] @ self.x[nb]
        self.x[self.basic] = self.Binv @ rhs
        self._since_refactor = 0

    def primal_feasible(self, tol):
        xb = self.x[self.basic]
        return bool(np.all(xb >= self.lo[self.basic] - tol) and np.all(xb <= self.hi[self.basic] + tol))

    def reduced_costs(self, cost):
        pi = cost[self.basic] @ self.Binv
        return pi, cost - pi @ self.A

    def _eligible(self, d):
        movable = (~self.is_basic) & (self.hi > self.lo)
        return movable & ((~self.at_upper & (d < -PRICE_TOL)) | (self.at_upper & (d > PRICE_TOL)))

    # -- main loop ---------------------------------------------------------
    def run(self, cost):
        stall, bland = 0, False
        obj = float(cost @ self.x)
        patience = 3 * (self.N + self.M)
        fresh = False
        while True:
            if self._since_refactor >= REFACTOR_EVERY:
                self.refactor()
            _, d = self.reduced_costs(cost)
            elig = self._eligible(d)
            if not elig.any():
                if fresh:
                    return
                # confirm optimality on a freshly computed basis inverse
                self.refactor()
                fresh = True
                continue
            fresh = False
            cand = np.flatnonzero(elig)
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = -1.0 if self.at_upper[q] else 1.0
            col = self.Binv @ self.A[:, q]
            delta = direction * col

            xb = self.x[self.basic]
            lob, hib = self.lo[self.basic], self.hi[self.basic]
            lim = np.full(self.M, np.inf)
            dec = delta > PIVOT_TOL
            inc = delta < -PIVOT_TOL
            lim[dec] = (xb[dec] - lob[dec]) / delta[dec]
            with np.errstate(invalid="ignore"):
                lim[inc] = (hib[inc] - xb[inc]) / (-delta[inc])
            np.maximum(lim, 0.0, out=lim)
            theta_row = lim.min() if self.M else np.inf
            theta_flip = self.hi[q] - self.lo[q]

            if theta_flip <= theta_row:
                if not np.isfinite(theta_flip):
                    raise UnboundedLpError("objective is unbounded below")
                theta = theta_flip
                self.x[self.basic] = xb - theta * delta
                self.at_upper[q] = not self.at_upper[q]
                self.x[q] = self.hi[q] if self.at_upper[q] else self.lo[q]
            else:
                theta = theta_row
                ties = np.flatnonzero(lim <= theta + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basic[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
                leave = int(self.basic[r])
                self.x[self.basic] = xb - theta * delta
                self.x[q] += direction * theta
                to_upper = delta[r] < 0
                self.x[leave] = self.hi[leave] if to_upper else self.lo[leave]
                self.at_upper[leave] = to_upper
                self.at_upper[q] = False
                self.is_basic[leave] = False
                self.is_basic[q] = True
                self.basic[r] = q
                piv = col[r]
                row = self.Binv[r] / piv
                self.Binv -= np.outer(col, row)
                self.Binv[r] = row
                self._since_refactor += 1

            self.pivots += 1
            if self.pivots > self.max_pivots:
                raise PivotLimitError(f"pivot limit {self.max_pivots} exceeded")
            new_obj = float(cost @ self.x)
            if new_obj < obj - 1e-12 * (1.0 + abs(obj)):
                stall, bland = 0, False
            else:
                stall += 1
                if stall >= patience:
                    bland = True
            obj = min(obj, new_obj)


def _cold_start(p: BoundedLp) -> _Simplex:
    M, N = p.shape
    r = p.b_eq - p.A_eq @ p.lower
    art_sign = np.where(r < 0, -1.0, 1.0)
    s = _Simplex(p, art_sign)
    s.x[:N] = p.lower
    s.set_basis(np.arange(N, N + M), np.zeros(N + M, dtype=bool))
    return s


def _warm_start(p: BoundedLp, basis: LpBasis) -> _Simplex | None:
    M, N = p.shape
    if basis.basic.shape != (M,) or basis.at_upper.shape != (N + M,):
        return None
    s = _Simplex(p, basis.art_sign)
    s.hi[N:] = 0.0
    try:
        s.set_basis(basis.basic, basis.at_upper)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(s.x)) or not s.primal_feasible(FEAS_TOL):
        return None
    return s


def solve_bounded_lp(p: BoundedLp, warm_start: LpBasis | None = None) -> LpSolution:
    """Solve a box-bounded LP.

    ``warm_start`` is the :class:`LpBasis` of an earlier solve with the same
    constraints and bounds (only the cost may differ); when it is still
    primal feasible phase 1 is skipped.
    """
    M, N = p.shape
    s = _warm_start(p, warm_start) if warm_start is not None else None
    if s is None:
        s = _cold_start(p)
        phase1 = np.concatenate([np.zeros(N), np.ones(M)])
        s.run(phase1)
        s.refactor()
        infeas = float(np.sum(s.x[N:]))
        if infeas > FEAS_TOL * max(1.0, float(np.max(np.abs(p.b_eq), initial=0.0))):
            return LpSolution(x=np.clip(s.x[:N], p.lower, p.upper), objective=np.nan,
                              status="infeasible", pivots=s.pivots)
        s.hi[N:] = 0.0
        s.x[N:][~s.is_basic[N:]] = 0.0
    cost = np.concatenate([p.c, np.zeros(M)])
    s.run(cost)
    s.refactor()
    pi, d = s.reduced_costs(cost)
    x = np.clip(s.x[:N], p.lower, p.upper)
    return LpSolution(
        x=x,
        objective=float(p.c @ x),
        status="optimal",
        pivots=s.pivots,
        duals=pi,
        reduced_costs=d[:N],
        basis=LpBasis(s.basic.copy(), s.at_upper.copy(), s.art_sign.copy()),
    )


def certificate_violation(p: BoundedLp, sol: LpSolution) -> float:
    """Largest sign violation of the reduced costs at nonbasic bounds.

    Variables strictly between their bounds must be basic and carry a zero
    reduced cost; those are checked too.
    """
    d = p.c - p.A_eq.T @ sol.duals
    x = sol.x
    at_lo = np.isclose(x, p.lower, rtol=0, atol=1e-9)
    at_hi = np.isclose(x, p.upper, rtol=0, atol=1e-9)
    free = ~(at_lo | at_hi)
    viol = 0.0
    viol = max(viol, float(np.max(-d[at_lo & ~at_hi], initial=0.0)))
    viol = max(viol, float(np.max(d[at_hi & ~at_lo], initial=0.0)))
    viol = max(viol, float(np.max(np.abs(d[free]), initial=0.0)))
    return viol


def build_split_lp(A, b, y, alpha: float, box: float = 1.0) -> BoundedLp:
    """LP for ``min alpha ||x||_1 - <x, y>  s.t.  A x = b,  |x_i| <= box``.

    Variables are ``(x+, x-)`` each bounded in ``[0, box]``.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if y.shape != (n,):
        raise ValueError("y length must equal the number of columns of A")
    c = np.concatenate([alpha - y, alpha + y])
    return BoundedLp(
        c=c,
        A_eq=np.hstack([A, -A]),
        b_eq=np.asarray(b, dtype=float),
        lower=np.zeros(2 * n),
        upper=np.full(2 * n, float(box)),
    )


def split_to_signed(xhat) -> np.ndarray:
    n = xhat.size // 2
    return xhat[:n] - xhat[n:]
