"""Command line entry point.

    python3 -m sorted_l1l2.cli phase --config scripts/configs/phase_dct.cfg --threads 4

Exit codes: 0 success, 1 config or I/O error, 2 numerical failure outside
a trial (trial failures are recorded in the CSV instead).
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import InfeasibleConstraintError, InnerStallError
from .experiments import KINDS, ConfigError, build_config, parse_config_text, run
from .lp import PivotLimitError, UnboundedLpError
from .regularizer import DegenerateDenominatorError, ZeroIterateError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

NUMERIC_ERRORS = (InnerStallError, InfeasibleConstraintError, PivotLimitError, UnboundedLpError,
                  DegenerateDenominatorError, ZeroIterateError, np.linalg.LinAlgError, FloatingPointError)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sorted-l1l2", description="Sorted L1/L2 recovery experiments")
    # accept both noisy_table and noisy-table
    p.add_argument("experiment", choices=list(KINDS) + [k.replace("_", "-") for k in KINDS if "_" in k])
    p.add_argument("--config", help="flat 'key = JSON value' file")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--solver", help="comma separated solver names")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = args.experiment.replace("-", "_")
    try:
        file_values = {}
        if args.config:
            with open(args.config) as fh:
                file_values = parse_config_text(fh.read())
        solvers = args.solver.split(",") if args.solver else None
        cfg = build_config(kind, file_values, seed=args.seed, out=args.out, threads=args.threads,
                           solvers=solvers)
        paths = run(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
