"""Separation frequency across the emergence window for a few matrix sizes.

Prints one row per (n, t) pair; set RANKONE_THREADS to use more cores.
"""

import argparse

from rankone.analysis import default_t_grid, emergence_scan
from rankone.domains import DomainParams
from rankone.rmt import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 500])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("n,t,c,frequency,failures")
    for n in args.sizes:
        grid = default_t_grid(n)
        curve = emergence_scan(RunConfig(n, seed=args.seed), grid, args.trials, DomainParams(epsilon=args.epsilon, n=n))
        for t, f in zip(grid, curve.frequencies):
            c = (t - 1) * n ** (1 / 3)
            print(f"{n},{t:.5f},{c:.2f},{f:.3f},{len(curve.failures)}")


if __name__ == "__main__":
    main()
