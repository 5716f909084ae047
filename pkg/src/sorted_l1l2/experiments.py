"""Experiment runners: toy objectives, success-rate sweeps, noisy MSE table,
support detection and convergence traces.

Each runner takes an :class:`ExperimentConfig`, writes CSV files into
``config.out`` and returns the paths it wrote.  Trials are independent and
may run in worker processes; rows are sorted by (cell, trial) before
writing so output bytes do not depend on the worker count.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import numpy as np

from .baselines import SOLVERS, default_config, l1l2_config
from .config import InfeasibleConstraintError, InnerStallError, SolverConfig
from .lp import PivotLimitError, UnboundedLpError
from .metrics import TrialRecord, oracle_ols_mse, relative_error
from .problems import ProblemSpec, make_problem, trial_seed
from .regularizer import (
    DegenerateDenominatorError,
    WeightSchedule,
    ZeroIterateError,
    build_weights,
    eval_ratio,
)

log = logging.getLogger(__name__)

KINDS = ("toy", "phase", "noisy_table", "support", "convergence")
METRICS = ("rel_err", "mse", "success", "recall", "precision", "topk_hit", "outer_iters", "wall_time_ms")
CELL_KEYS = ("matrix_kind", "coherence_param", "m", "n", "sparsity", "solver")
# Errors a single trial may raise; recorded as a failed trial, never fatal.
TRIAL_ERRORS = (InnerStallError, InfeasibleConstraintError, PivotLimitError, UnboundedLpError,
                DegenerateDenominatorError, ZeroIterateError, np.linalg.LinAlgError, FloatingPointError)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str = "phase"
    matrix_kind: str = "oversampled_dct"
    coherence_params: list = field(default_factory=lambda: [5.0])
    m: int = 64
    n: int = 1024
    sparsities: list = field(default_factory=lambda: list(range(2, 41, 2)))
    m_list: list = field(default_factory=lambda: list(range(250, 361, 10)))
    min_separation: int = 1
    noise_sigma: float = 0.0
    normalize_columns: bool = False
    solvers: list = field(default_factory=lambda: ["l1", "l1-l2", "l1l2", "sorted"])
    trials: int = 50
    seed: int = 0
    out: str = "results"
    threads: int = 1
    subproblem: str = "lp"
    alpha: float | None = None
    # (t, r) of the "sorted-1stage" pseudo solver
    one_stage_t: int = 27
    one_stage_r: float = 3.0
    record_timing: bool = False
    # toy
    toy_a: list = field(default_factory=lambda: [-3.0, 3.5, 4.0])
    toy_t: int = 2
    toy_r: list = field(default_factory=lambda: [1.0, 5.0, 10.0])
    # convergence
    inner_max_list: list = field(default_factory=lambda: [1, 5, 20, 100])
    noisy_m: int = 300
    noisy_n: int = 512
    noisy_sparsity: int = 130
    noisy_sigma: float = 0.1
    outer_max: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for name in ("coherence_params", "sparsities", "m_list", "solvers", "toy_a", "toy_r", "inner_max_list"):
            if not isinstance(getattr(self, name), list) or not getattr(self, name):
                raise ConfigError(f"{name} must be a nonempty list")
        for s in self.solvers:
            if s not in SOLVERS and s != "sorted-1stage":
                raise ConfigError(f"unknown solver {s!r}")
        if self.kind == "noisy_table" and not self.noise_sigma > 0:
            raise ConfigError("noisy_table needs noise_sigma > 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def defaults_for(kind: str) -> dict:
    """Per-experiment defaults layered under the config file."""
    if kind == "noisy_table":
        return dict(matrix_kind="correlated_gaussian", coherence_params=[0.0], n=512, sparsities=[130],
                    noise_sigma=0.1, normalize_columns=True, trials=50)
    if kind == "support":
        return dict(matrix_kind="correlated_gaussian", coherence_params=[0.1],
                    sparsities=[10, 12, 14, 16, 18, 20], trials=100)
    if kind == "convergence":
        return dict(sparsities=[12], trials=1)
    return {}


def parse_config_text(text: str) -> dict:
    """Parse ``key = <JSON value>`` lines; ``#`` starts a comment line."""
    out: dict[str, Any] = {}
    valid = set(ExperimentConfig.keys())
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in valid:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {lineno}: value for {key!r} is not JSON ({exc.msg})") from None
    return out


def build_config(kind: str, file_values: dict | None = None, **overrides) -> ExperimentConfig:
    values = defaults_for(kind)
    values.update(file_values or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["kind"] = kind
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- csv output

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, columns: list[str], rows: list[dict]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _write_meta(cfg: ExperimentConfig, files: list[str]):
    meta = {
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.to_dict(),
        "files": [os.path.basename(f) for f in files],
        "mse": "per entry, ||x - x_true||^2 / n",
        "failed_trial": "outer_iters = -1, metrics of the zero estimate",
    }
    with open(os.path.join(cfg.out, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def aggregate(records: list[TrialRecord]) -> tuple[list[str], list[dict]]:
    """Mean / population std of every metric per cell, in first-seen cell order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(tuple(getattr(rec, k) for k in CELL_KEYS), []).append(rec)
    columns = list(CELL_KEYS) + [f"{m}_{s}" for m in METRICS for s in ("mean", "std")] + ["trials"]
    rows = []
    for key, recs in groups.items():
        row = dict(zip(CELL_KEYS, key))
        for m in METRICS:
            vals = np.array([float(getattr(r, m)) for r in recs])
            row[f"{m}_mean"] = float(vals.mean())
            row[f"{m}_std"] = float(vals.std())
        row["trials"] = len(recs)
        rows.append(row)
    return columns, rows


# ---------------------------------------------------------------- trials

def solver_config(label: str, setting: str, m: int, n: int, cfg: ExperimentConfig) -> SolverConfig:
    if label == "l1l2":
        sc = l1l2_config(setting, m, n)
    else:
        sc = default_config(setting, m, n)
    if label == "sorted-1stage":
        sc = sc.replace(schedule=WeightSchedule.one_stage(cfg.one_stage_t, cfg.one_stage_r))
    kw: dict[str, Any] = {"subproblem": cfg.subproblem}
    if cfg.alpha is not None and label != "l1l2":
        kw["alpha"] = cfg.alpha
    if cfg.outer_max is not None:
        kw["outer_max"] = cfg.outer_max
    return sc.replace(**kw)


def _solver_fn(label: str):
    return SOLVERS["sorted" if label == "sorted-1stage" else label]


def _run_trial(task) -> tuple[tuple, list[TrialRecord], dict]:
    order, spec, labels, setting, cfg = task
    problem = make_problem(spec)
    m, n = problem.shape
    records = []
    for label in labels:
        sc = solver_config(label, setting, m, n, cfg)
        t0 = time.perf_counter()
        try:
            res = _solver_fn(label)(problem, setting, sc)
            x, iters = res.x, res.outer_iters
        except TRIAL_ERRORS as exc:
            log.warning("trial %s solver %s failed: %s", order, label, exc)
            x, iters = np.zeros(n), -1
        ms = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else 0.0
        records.append(TrialRecord.evaluate(label, spec, x, problem.x_true, iters, ms))
    extra = {}
    if setting == "noisy":
        support = np.flatnonzero(problem.x_true)
        # per-entry units, comparable with TrialRecord.mse
        extra["oracle_mse"] = oracle_ols_mse(problem.A, support, spec.noise_sigma) / n
    return order, records, extra


def _execute(tasks: list, threads: int) -> list:
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=1))
    else:
        results = [_run_trial(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    return results


def _sweep_tasks(cfg: ExperimentConfig, setting: str, ms: list, sigma: float) -> list:
    tasks = []
    cell = 0
    for coh in cfg.coherence_params:
        for m in ms:
            for s in cfg.sparsities:
                for trial in range(cfg.trials):
                    spec = ProblemSpec(cfg.matrix_kind, m=m, n=cfg.n, coherence_param=float(coh), sparsity=s,
                                       min_separation=cfg.min_separation, noise_sigma=sigma,
                                       normalize_columns=cfg.normalize_columns,
                                       seed=trial_seed(cfg.seed, trial))
                    tasks.append(((cell, trial), spec, list(cfg.solvers), setting, cfg))
                cell += 1
    return tasks


def _records_sorted(results) -> list[TrialRecord]:
    # within a cell-trial the solver order follows cfg.solvers; regroup by (cell, solver, trial)
    by_solver = []
    for (cell, trial), recs, _ in results:
        for j, rec in enumerate(recs):
            by_solver.append(((cell, j, trial), rec))
    by_solver.sort(key=lambda p: p[0])
    return [rec for _, rec in by_solver]


def _write_trials(cfg: ExperimentConfig, records: list[TrialRecord]) -> list[str]:
    os.makedirs(cfg.out, exist_ok=True)
    trials_path = os.path.join(cfg.out, "trials.csv")
    write_csv(trials_path, TrialRecord.columns(), [dataclasses.asdict(r) for r in records])
    agg_cols, agg_rows = aggregate(records)
    agg_path = os.path.join(cfg.out, "aggregate.csv")
    write_csv(agg_path, agg_cols, agg_rows)
    return [trials_path, agg_path]


def run_phase(cfg: ExperimentConfig) -> list[str]:
    """Noise-free success-rate sweep over (coherence, sparsity, solver)."""
    results = _execute(_sweep_tasks(cfg, "noisefree", [cfg.m], 0.0), cfg.threads)
    paths = _write_trials(cfg, _records_sorted(results))
    _write_meta(cfg, paths)
    return paths


def run_support(cfg: ExperimentConfig) -> list[str]:
    """Support detection on noise-free problems; same outputs as :func:`run_phase`."""
    return run_phase(cfg)


def run_noisy_table(cfg: ExperimentConfig) -> list[str]:
    """Mean MSE per (m, solver) plus the OLS oracle computed on each trial's true support."""
    results = _execute(_sweep_tasks(cfg, "noisy", list(cfg.m_list), cfg.noise_sigma), cfg.threads)
    records = _records_sorted(results)
    paths = _write_trials(cfg, records)

    oracle_rows = []
    for (cell, trial), recs, extra in results:
        oracle_rows.append({"m": recs[0].m, "trial": trial, "seed": recs[0].seed,
                            "oracle_mse": extra["oracle_mse"]})
    oracle_path = os.path.join(cfg.out, "oracle.csv")
    write_csv(oracle_path, ["m", "trial", "seed", "oracle_mse"], oracle_rows)

    oracle_by_m: dict[int, list[float]] = {}
    for row in oracle_rows:
        oracle_by_m.setdefault(row["m"], []).append(row["oracle_mse"])
    _, agg_rows = aggregate(records)
    table = []
    for row in agg_rows:
        orc = float(np.mean(oracle_by_m[row["m"]]))
        table.append({"m": row["m"], "solver": row["solver"], "mse_mean": row["mse_mean"],
                      "mse_std": row["mse_std"], "oracle_mse": orc,
                      "mse_over_oracle": row["mse_mean"] / orc, "trials": row["trials"]})
    table_path = os.path.join(cfg.out, "noisy_table.csv")
    write_csv(table_path, ["m", "solver", "mse_mean", "mse_std", "oracle_mse", "mse_over_oracle", "trials"],
              table)
    paths += [oracle_path, table_path]
    _write_meta(cfg, paths)
    return paths


# ---------------------------------------------------------------- toy

def toy_grid() -> np.ndarray:
    return np.arange(-200, 201) / 100.0


def toy_point(a: float, k: float) -> np.ndarray:
    return np.array([-a * k + 1.0, 2.0 * k + 1.0, k, k])


def toy_objectives(a: float, t: int = 2, rs=(1.0, 5.0, 10.0)) -> dict[str, np.ndarray]:
    """Objective of each model along ``x(k) = (-a k + 1, 2 k + 1, k, k)``."""
    ks = toy_grid()
    xs = [toy_point(a, k) for k in ks]
    out = {
        "l1": np.array([np.abs(x).sum() for x in xs]),
        "l1-l2": np.array([np.abs(x).sum() - np.linalg.norm(x) for x in xs]),
        "l1l2": np.array([np.abs(x).sum() / np.linalg.norm(x) for x in xs]),
    }
    for r in rs:
        out[f"sorted_t{t}_r{r:g}"] = np.array([eval_ratio(x, build_weights(x, t, r)) for x in xs])
    return out


def toy_argmins(cfg: ExperimentConfig | None = None) -> list[dict]:
    cfg = cfg or build_config("toy")
    ks = toy_grid()
    rows = []
    for a in cfg.toy_a:
        for model, vals in toy_objectives(a, cfg.toy_t, cfg.toy_r).items():
            i = int(np.argmin(vals))
            ties = int(np.count_nonzero(vals <= vals[i] + 1e-12))
            rows.append({"a": float(a), "model": model, "argmin_k": float(ks[i]), "min_value": float(vals[i]),
                         "n_minimizers": ties, "argmin_is_zero": bool(ks[i] == 0.0)})
    return rows


def run_toy(cfg: ExperimentConfig) -> list[str]:
    """Grid objectives of L1, L1-L2, L1/L2 and sorted L1/L2 on the 4-variable toy family."""
    os.makedirs(cfg.out, exist_ok=True)
    ks = toy_grid()
    obj_rows = []
    for a in cfg.toy_a:
        for model, vals in toy_objectives(a, cfg.toy_t, cfg.toy_r).items():
            for k, v in zip(ks, vals):
                obj_rows.append({"a": float(a), "model": model, "k": float(k), "value": float(v)})
    obj_path = os.path.join(cfg.out, "toy_objectives.csv")
    write_csv(obj_path, ["a", "model", "k", "value"], obj_rows)
    arg_path = os.path.join(cfg.out, "toy_argmin.csv")
    write_csv(arg_path, ["a", "model", "argmin_k", "min_value", "n_minimizers", "argmin_is_zero"],
              toy_argmins(cfg))
    _write_meta(cfg, [obj_path, arg_path])
    return [obj_path, arg_path]


# ---------------------------------------------------------------- convergence

def convergence_traces(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    spec = ProblemSpec(cfg.matrix_kind, m=cfg.m, n=cfg.n, coherence_param=float(cfg.coherence_params[0]),
                       sparsity=cfg.sparsities[0], min_separation=cfg.min_separation,
                       normalize_columns=cfg.normalize_columns, seed=trial_seed(cfg.seed, 0))
    problem = make_problem(spec)
    sc = solver_config("sorted", "noisefree", cfg.m, cfg.n, cfg)
    res = SOLVERS["sorted"](problem, "noisefree", sc)
    for k, (x, obj) in enumerate(zip(res.iterates, res.objective_trace)):
        rows.append({"setting": "noisefree", "inner_max": 0, "iter": k,
                     "rel_err": relative_error(x, problem.x_true), "objective": obj})

    nspec = ProblemSpec("correlated_gaussian", m=cfg.noisy_m, n=cfg.noisy_n, coherence_param=0.0,
                        sparsity=cfg.noisy_sparsity, noise_sigma=cfg.noisy_sigma, normalize_columns=True,
                        seed=trial_seed(cfg.seed, 0))
    nproblem = make_problem(nspec)
    for inner in cfg.inner_max_list:
        sc = solver_config("sorted", "noisy", cfg.noisy_m, cfg.noisy_n, cfg).replace(inner_max=int(inner))
        res = SOLVERS["sorted"](nproblem, "noisy", sc)
        # the recorded trace at k=0 is the lasso point under stage-1 weights
        for k, (x, obj) in enumerate(zip(res.iterates, res.objective_trace)):
            rows.append({"setting": "noisy", "inner_max": int(inner), "iter": k,
                         "rel_err": relative_error(x, nproblem.x_true), "objective": obj})
    return rows


def run_convergence(cfg: ExperimentConfig) -> list[str]:
    """Per-outer-iteration relative error and objective traces."""
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "traces.csv")
    write_csv(path, ["setting", "inner_max", "iter", "rel_err", "objective"], convergence_traces(cfg))
    _write_meta(cfg, [path])
    return [path]


RUNNERS = {
    "toy": run_toy,
    "phase": run_phase,
    "noisy_table": run_noisy_table,
    "support": run_support,
    "convergence": run_convergence,
}


def run(cfg: ExperimentConfig) -> list[str]:
    return RUNNERS[cfg.kind](cfg)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "build_config",
    "parse_config_text",
    "run",
    "run_convergence",
    "run_noisy_table",
    "run_phase",
    "run_support",
    "run_toy",
    "toy_argmins",
    "toy_objectives",
]
