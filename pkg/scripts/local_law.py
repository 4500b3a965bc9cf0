"""Empirical local-law error against n^0.15 for several seeds."""

import argparse

from rankone.resolvent import local_law_error, local_law_grid
from rankone.rmt import RunConfig, draw_spectral


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    grid = local_law_grid(args.n)
    print(f"threshold n^0.15 = {args.n ** 0.15:.3f}")
    for seed in range(args.seeds):
        rep = local_law_error(draw_spectral(RunConfig(args.n, seed=seed)).rin, grid, args.n)
        worst = rep.grid[rep.normalized_error.argmax()]
        print(f"seed {seed}: sup_normalized {rep.sup_normalized:.3f} at z = {worst:.4f}")


if __name__ == "__main__":
    main()
