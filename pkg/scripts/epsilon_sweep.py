"""Accuracy of the fair private post-processing as the privacy level varies.

Writes CSV (epsilon, target, zero_policy, accuracy) for a dp_samples file or
manifest; defaults to the skewed test fixture. With --plot, also saves a PNG
(needs matplotlib, which the package itself does not depend on).

    python3 scripts/epsilon_sweep.py [-i data.csv] [--stop 10] [--count 101] [--plot out.png]
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from seqfair.dp import DPConfig, feasibility_bound, nonprivate_optimum, solve_dp_policy
from seqfair.ingest import load_path

DEFAULT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "skewed_dp.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-i", "--input", default=str(DEFAULT))
    ap.add_argument("--stop", type=float, default=10.0)
    ap.add_argument("--count", type=int, default=101)
    ap.add_argument("--targets", nargs="+", default=["es", "eo"])
    ap.add_argument("--plot")
    args = ap.parse_args()

    model = load_path(args.input)
    grid = np.linspace(0, args.stop, args.count)
    bound = feasibility_bound(model.induced_pmf())
    print(f"# feasibility bound {bound.epsilon:.4f}; non-private optimum {nonprivate_optimum(model):.6f}",
          file=sys.stderr)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("epsilon", "target", "zero_policy", "accuracy"))
    curves = {t: [] for t in args.targets}
    for eps in grid:
        for t in args.targets:
            sol = solve_dp_policy(model, DPConfig(float(eps)), t)
            curves[t].append(sol.outcome.accuracy)
            w.writerow((f"{eps:.6g}", t, int(sol.zero_policy), f"{sol.outcome.accuracy:.10g}"))
    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for t, acc in curves.items():
            ax.plot(grid, acc, label=t.upper())
        ax.axvline(bound.epsilon, ls=":", c="grey", label="feasibility bound")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("accuracy")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
