"""FICO accuracy against the no-selection budget psi for a fixed horizon.

    python3 scripts/psi_sweep.py [--horizon 100] [--gamma 0.01]
"""

import argparse
import csv
import sys

import numpy as np

from seqfair.cli import sweep_rows
from seqfair.ingest import load_path

from fico_tables import MANIFEST


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100)
    ap.add_argument("--gamma", type=float, default=0.01)
    ap.add_argument("--targets", nargs="+", default=["es", "eo", "sp"])
    args = ap.parse_args()
    grid = [float(v) for v in np.geomspace(1e-3, 1, 16)]
    rows = sweep_rows(load_path(MANIFEST), "psi", grid, args.targets, args.gamma, args.horizon)
    w = csv.DictWriter(sys.stdout, list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
