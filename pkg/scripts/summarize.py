"""Print an aggregate or noisy_table CSV as an aligned text table.

    python3 scripts/summarize.py results/phase_dct/aggregate.csv success_mean
    python3 scripts/summarize.py results/noisy_table/noisy_table.csv mse_over_oracle
"""
import csv
import sys
from collections import defaultdict


def main(path, column):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    row_key = "m" if "mse_over_oracle" in rows[0] else "sparsity"
    solvers = list(dict.fromkeys(r["solver"] for r in rows))
    table = defaultdict(dict)
    for r in rows:
        prefix = r.get("coherence_param", "")
        table[(prefix, int(r[row_key]))][r["solver"]] = float(r[column])
    print(f"{'cell':>14} " + " ".join(f"{s:>14}" for s in solvers))
    for (coh, key), vals in sorted(table.items()):
        label = f"{coh}/{key}" if coh else str(key)
        print(f"{label:>14} " + " ".join(f"{vals.get(s, float('nan')):>14.4f}" for s in solvers))


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
