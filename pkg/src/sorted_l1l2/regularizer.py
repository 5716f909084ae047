"""Sorted L1/L2 penalty: rank-based weights, objective value, DCA linearization.

The penalty is ``R_w(x) = ||w * x||_1 / ||(1 - w) * x||_2`` where the weights
are assigned by magnitude rank of the current iterate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np


class ZeroIterateError(ValueError):
    """Weights (or linearization) requested at x = 0."""


class DegenerateDenominatorError(ValueError):
    """``||(1 - w) * x||_2`` vanished for a nonzero x."""


@dataclass(frozen=True)
class Stage:
    t: int
    r: float

    def __post_init__(self):
        if self.t < 2:
            raise ValueError(f"t must be >= 2, got {self.t}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")


@dataclass(frozen=True)
class WeightSchedule:
    """Which (t, r) to use at each outer iteration.

    ``two_stage`` uses ``stage1`` for outer iterations ``k <= switch_iter``
    and ``stage2`` afterwards.  ``one_stage`` always uses ``stage1``.
    ``constant_half`` ignores (t, r) and yields w = 1/2 (plain L1/L2).
    """

    stage1: Stage = field(default_factory=lambda: Stage(20, 0.8))
    stage2: Stage = field(default_factory=lambda: Stage(27, 3.0))
    switch_iter: int = 20
    mode: Literal["two_stage", "one_stage", "constant_half"] = "two_stage"

    def __post_init__(self):
        if self.mode not in ("two_stage", "one_stage", "constant_half"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.switch_iter < 1:
            raise ValueError("switch_iter must be positive")

    @classmethod
    def noisefree(cls) -> "WeightSchedule":
        return cls(Stage(20, 0.8), Stage(27, 3.0), 20, "two_stage")

    @classmethod
    def noisy(cls) -> "WeightSchedule":
        return cls(Stage(100, 0.8), Stage(120, 3.0), 20, "two_stage")

    @classmethod
    def one_stage(cls, t: int, r: float) -> "WeightSchedule":
        return cls(Stage(t, r), Stage(t, r), 1, "one_stage")

    @classmethod
    def constant_half(cls) -> "WeightSchedule":
        return cls(mode="constant_half")

    def stage(self, k: int) -> Stage:
        if self.mode == "two_stage" and k > self.switch_iter:
            return self.stage2
        return self.stage1

    def weights(self, x, k: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.mode == "constant_half":
            if not np.any(x):
                raise ZeroIterateError("weights are undefined at x = 0")
            return np.full(x.shape, 0.5)
        s = self.stage(k)
        return build_weights(x, min(s.t, x.size), s.r)


def magnitude_order(x) -> np.ndarray:
    """Indices by descending |x|, ties to the smaller index."""
    return np.argsort(-np.abs(x), kind="stable")


def build_weights(x, t: int, r: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 2 <= t <= n:
        raise ValueError(f"need 2 <= t <= n, got t={t}, n={n}")
    if not r > 0:
        raise ValueError("r must be positive")
    if not np.any(x):
        raise ZeroIterateError("weights are undefined at x = 0")
    w = np.ones(n)
    top = magnitude_order(x)[:t]
    ranks = np.arange(1, t + 1)
    w[top] = np.exp(-r * (t - ranks) / t)
    return w


def eval_ratio(x, w) -> float:
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if not np.any(x):
        return 0.0
    # the ratio is scale invariant; normalizing avoids underflow in the 2-norm
    x = x / np.max(np.abs(x))
    num = np.sum(np.abs(w * x))
    den = np.linalg.norm((1.0 - w) * x)
    if den == 0.0:
        raise DegenerateDenominatorError("||(1 - w) * x||_2 = 0 for nonzero x")
    return float(num / den)


def dca_linearization(x, w, alpha: float, lam: float) -> np.ndarray:
    """Gradient of ``alpha ||x||_1 - lam R_w(x)`` with the weights frozen.

    Uses the subgradient ``w * sign(x)`` of the weighted L1 numerator and
    ``sign(0) = 0``.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    sx = np.sign(x)
    u = (1.0 - w) * x
    D = np.linalg.norm(u)
    if D == 0.0:
        raise DegenerateDenominatorError("||(1 - w) * x||_2 = 0")
    N = np.sum(np.abs(w * x))
    return alpha * sx - lam * (w * sx) / D + lam * N * ((1.0 - w) * u) / D**3


def shrink(v, a: float) -> np.ndarray:
    if a < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - a, 0.0)
