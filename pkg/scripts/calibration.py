"""Smallest epsilon (on a 0.05 grid) for which a traced GUE run has no confinement violations.

Shows how far the default finite-N calibration is from what the
asymptotic domains need at a given size.
"""

import argparse

import numpy as np

from rankone.analysis import check_confinement
from rankone.domains import DomainParams
from rankone.rmt import RunConfig, draw_spectral
from rankone.trajectory import TimeGrid, trace_trajectories


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--t-max", type=float, default=2.0)
    args = ap.parse_args()
    for seed in range(args.seeds):
        d = draw_spectral(RunConfig(args.n, seed=seed))
        b = trace_trajectories(d.rin, TimeGrid.uniform(args.t_max, int(100 * args.t_max)))
        base = check_confinement(b, DomainParams(n=args.n))
        needed = None
        for eps in np.arange(0.3, 0.96, 0.05):
            p = DomainParams(epsilon=float(eps), zeta=min(0.2, float(eps) - 0.01), n=args.n)
            if check_confinement(b, p).ok:
                needed = round(float(eps), 2)
                break
        print(f"seed {seed}: {base.violations} violations at eps=0.3, worst at {base.worst_at}; clean from eps={needed}")


if __name__ == "__main__":
    main()
