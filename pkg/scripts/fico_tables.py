"""Group thresholds on the bundled FICO tables, with and without a time limit.

    python3 scripts/fico_tables.py [--horizon 100] [--psi 0.5]
"""

import argparse
from pathlib import Path

from seqfair.errors import InfeasibleError
from seqfair.ingest import load_path
from seqfair.thresholds import SearchConfig, TimeConstraint, search_thresholds

MANIFEST = Path(__file__).resolve().parents[1] / "src" / "seqfair" / "data" / "fico.json"
ROWS = [("es", 0.01), ("es", 0.001), ("eo", 0.01), ("eo", 0.001), ("sp", 0.01), ("sp", 0.001)]


def table(model, tc):
    print(f"{'target':<10}{'tau0':>8}{'tau1':>8}{'p_e0':>9}{'p_e1':>9}{'accuracy':>10}")
    for fairness, gamma in ROWS:
        label = f"{gamma:g}-{fairness.upper()}"
        try:
            r = search_thresholds(model, SearchConfig(fairness, gamma, tc))
        except InfeasibleError as e:
            print(f"{label:<10}infeasible ({e.binding})")
            continue
        o = r.outcome
        print(f"{label:<10}{r.strict[0]:>8}{r.strict[1]:>8}{o.p_e0:>9.3f}{o.p_e1:>9.3f}{o.accuracy:>10.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100)
    ap.add_argument("--psi", type=float, default=0.5)
    args = ap.parse_args()
    model = load_path(MANIFEST)
    print("No time constraint")
    table(model, None)
    print(f"\nTime constraint H={args.horizon}, psi={args.psi}")
    table(model, TimeConstraint(args.horizon, args.psi))


if __name__ == "__main__":
    main()
