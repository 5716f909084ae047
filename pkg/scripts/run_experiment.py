"""Run one experiment from a config file in scripts/configs.

    python3 scripts/run_experiment.py phase_dct --threads 4
    python3 scripts/run_experiment.py noisy_table --trials 5

The experiment kind is taken from the file name prefix.
"""
import argparse
import os
import sys
import tempfile

from sorted_l1l2 import cli

HERE = os.path.dirname(os.path.abspath(__file__))
KIND = {"toy": "toy", "phase": "phase", "stages": "phase", "noisy": "noisy_table",
        "support": "support", "convergence": "convergence"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("name", help="config name without .cfg, e.g. phase_dct")
    ap.add_argument("--threads", default="1")
    ap.add_argument("--trials", type=int, help="override the trial count (writes a temporary config)")
    ap.add_argument("--out")
    args = ap.parse_args()

    path = os.path.join(HERE, "configs", args.name + ".cfg")
    kind = KIND[args.name.split("_")[0]]
    if args.trials is not None:
        with open(path) as fh:
            lines = [ln for ln in fh if not ln.startswith("trials")]
        fd, path = tempfile.mkstemp(suffix=".cfg")
        with os.fdopen(fd, "w") as fh:
            fh.writelines(lines + [f"trials = {args.trials}\n"])
    argv = [kind, "--config", path, "--threads", args.threads]
    if args.out:
        argv += ["--out", args.out]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
