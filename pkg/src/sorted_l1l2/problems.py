"""Seeded generators for sensing matrices, sparse ground truths and measurements."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Literal

import numpy as np

# Purpose tags mixed into child seeds; never renumber.
TAG_MATRIX = 1
TAG_SIGNAL = 2
TAG_NOISE = 3
TAG_TRIAL = 4

MAX_SUPPORT_RETRIES = 100_000


def child_rng(seed: int, tag: int, index: int = 0) -> np.random.Generator:
    """Independent stream for ``(seed, tag, index)``.

    The mix is numpy's ``SeedSequence`` hash of the 64-bit seed with the
    spawn key ``(tag, index)``, so streams do not depend on call order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(tag), int(index)))
    return np.random.default_rng(ss)


def trial_seed(base_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial`` under ``base_seed``."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(TAG_TRIAL, int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ProblemSpec:
    matrix_kind: Literal["oversampled_dct", "correlated_gaussian"] = "oversampled_dct"
    m: int = 64
    n: int = 1024
    coherence_param: float = 5.0
    sparsity: int = 10
    min_separation: int = 1
    noise_sigma: float = 0.0
    normalize_columns: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.matrix_kind not in ("oversampled_dct", "correlated_gaussian"):
            raise ValueError(f"unknown matrix kind {self.matrix_kind!r}")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 1 <= self.sparsity <= self.n:
            raise ValueError("need 1 <= sparsity <= n")
        if self.min_separation < 1 or (self.sparsity - 1) * self.min_separation >= self.n:
            raise ValueError("no support with the requested separation exists")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.matrix_kind == "correlated_gaussian" and not 0 <= self.coherence_param < 1:
            raise ValueError("R must lie in [0, 1)")
        if self.matrix_kind == "oversampled_dct" and self.coherence_param <= 0:
            raise ValueError("F must be positive")

    def replace(self, **kw) -> "ProblemSpec":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class MeasurementProblem:
    A: np.ndarray
    b: np.ndarray
    x_true: np.ndarray | None
    spec: ProblemSpec | None = None

    @property
    def shape(self):
        return self.A.shape


def gen_oversampled_dct(m: int, n: int, F: float, seed: int, h=None) -> np.ndarray:
    """Columns ``cos(2 pi h j / F) / sqrt(m)``, ``j = 1..n``, ``h ~ U[0,1]^m``.

    Pass ``h`` to bypass the random draw.
    """
    if m < 1 or n < 1 or F <= 0:
        raise ValueError("m, n and F must be positive")
    if h is None:
        h = child_rng(seed, TAG_MATRIX).uniform(0.0, 1.0, size=m)
    h = np.asarray(h, dtype=float)
    j = np.arange(1, n + 1)
    return np.cos(2.0 * np.pi * np.outer(h, j) / F) / np.sqrt(m)


def gen_correlated_gaussian(m: int, n: int, R: float, seed: int,
                            normalize_columns: bool = False) -> np.ndarray:
    """Rows drawn from N(0, (1-R) I + R 11^T)."""
    if not 0 <= R < 1:
        raise ValueError("R must lie in [0, 1)")
    rng = child_rng(seed, TAG_MATRIX)
    G = rng.standard_normal((m, n))
    g0 = rng.standard_normal((m, 1))
    A = np.sqrt(1.0 - R) * G + np.sqrt(R) * g0
    if normalize_columns:
        A = A - A.mean(axis=0)
        A = A / np.linalg.norm(A, axis=0)
    return A


def _sample_support(rng, n, s, L):
    for _ in range(MAX_SUPPORT_RETRIES):
        idx = np.sort(rng.choice(n, size=s, replace=False))
        if s == 1 or np.min(np.diff(idx)) >= L:
            return idx
    raise RuntimeError(f"no support with separation {L} found in {MAX_SUPPORT_RETRIES} draws")


def gen_ground_truth(n: int, s: int, L: int, seed: int) -> np.ndarray:
    if s < 1 or s > n or L < 1 or (s - 1) * L >= n:
        raise ValueError(f"infeasible support: n={n}, s={s}, L={L}")
    rng = child_rng(seed, TAG_SIGNAL)
    idx = _sample_support(rng, n, s, L)
    vals = rng.standard_normal(s)
    x = np.zeros(n)
    x[idx] = vals
    return x / np.max(np.abs(x))


def gen_matrix(spec: ProblemSpec) -> np.ndarray:
    if spec.matrix_kind == "oversampled_dct":
        A = gen_oversampled_dct(spec.m, spec.n, spec.coherence_param, spec.seed)
        if spec.normalize_columns:
            A = A - A.mean(axis=0)
            A = A / np.linalg.norm(A, axis=0)
        return A
    return gen_correlated_gaussian(spec.m, spec.n, spec.coherence_param, spec.seed,
                                   spec.normalize_columns)


def make_problem(spec: ProblemSpec) -> MeasurementProblem:
    A = gen_matrix(spec)
    x = gen_ground_truth(spec.n, spec.sparsity, spec.min_separation, spec.seed)
    b = A @ x
    if spec.noise_sigma > 0:
        b = b + spec.noise_sigma * child_rng(spec.seed, TAG_NOISE).standard_normal(spec.m)
    return MeasurementProblem(A=A, b=b, x_true=x, spec=spec)
