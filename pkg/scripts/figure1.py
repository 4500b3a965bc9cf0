"""Bulk trajectories of a 100 x 100 GUE matrix up to t = 3, as SVG + CSV."""

import argparse
import sys

from rankone.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/figure1")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--n", type=int, default=100)
    args = ap.parse_args()
    sys.exit(main(["trace", "--n", str(args.n), "--seed", str(args.seed), "--t-max", "3", "--steps", "300",
                   "--out", args.out]))
