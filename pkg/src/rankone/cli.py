"""``rankone`` command line.

Exit codes: 0 success, 1 numeric failure (a JSON error report goes to
stderr and PREFIX.error.json), 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from rankone import __version__
from rankone.analysis import classify_outlier, default_t_grid, emergence_scan, origin_histogram
from rankone.domains import DomainParams
from rankone.io import dumps, run_metadata, write_bundle_csv, write_json
from rankone.plotting import PlotSpec, render_svg
from rankone.resolvent import local_law_error, local_law_grid
from rankone.rmt import ENSEMBLES, ConfigError, DimensionError, ResolventInput, RunConfig, draw_spectral
from rankone.trajectory import TimeGrid, integrate_ode, match_roots, trace_trajectories

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

# mu = (-1, 1), c = (1/2, 1/2)
FIXTURES = {"toy2": ResolventInput(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))}


class UsageError(ValueError):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def parse_t_grid(spec: str, n: int) -> np.ndarray:
    """'auto', 'rel:c1,c2,...' (t = 1 + c n^-1/3) or an explicit list 't1,t2,...'."""
    spec = spec.strip()
    if spec == "auto":
        return default_t_grid(n)
    rel = spec.startswith("rel:")
    body = spec[4:] if rel else spec
    try:
        vals = np.array([float(x) for x in body.split(",") if x.strip()])
    except ValueError as exc:
        raise UsageError(f"bad --t-grid {spec!r}") from exc
    if vals.size == 0:
        raise UsageError("empty --t-grid")
    if rel:
        vals = 1 + vals * float(n) ** (-1 / 3)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise UsageError("--t-grid values must be positive and finite")
    return vals


def _parse_points(spec: str) -> np.ndarray:
    try:
        return np.array([complex(p.replace(" ", "")) for p in spec.split(",") if p.strip()])
    except ValueError as exc:
        raise UsageError(f"bad --points {spec!r}") from exc


def _prefix(p: str) -> Path:
    path = Path(p)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands


def cmd_trace(args) -> dict:
    config = RunConfig(args.n, args.ensemble, args.seed)
    out = _prefix(args.out)
    data = draw_spectral(config)
    grid = TimeGrid.uniform(args.t_max, args.steps)
    meta = run_metadata(config, data.resampled, t_max=args.t_max, steps=args.steps, method=args.method)

    primary = None
    if args.method in ("continuation", "both"):
        primary = trace_trajectories(data.rin, grid)
        meta["continuation"] = primary.diagnostics()
        meta["min_distance_trace"] = primary.min_distance.tolist()
    if args.method in ("ode", "both"):
        ode = integrate_ode(data.mus, data.weights, grid, dt=args.ode_dt)
        meta["ode"] = dict(ode.diagnostics(), dt=args.ode_dt)
        if primary is None:
            primary = ode
            meta["min_distance_trace"] = ode.min_distance.tolist()
        else:
            write_bundle_csv(ode, f"{out}.ode.csv")
            dev = max(match_roots(a, b)[1] for a, b in zip(primary.lambdas, ode.lambdas))
            meta["max_deviation"] = float(dev)
    write_bundle_csv(primary, f"{out}.csv")

    spec = PlotSpec(title=f"n={args.n} {args.ensemble} seed={args.seed}")
    if args.t_max > 1 and args.n > 1:
        params = DomainParams(epsilon=args.epsilon, n=args.n, t_cap=max(3.0, args.t_max + 1))
        rep = classify_outlier(primary.lambdas[-1], args.t_max, params)
        meta["outlier"] = rep.to_dict()
        spec.t_marker = args.t_max
        spec.disk = (1j * rep.t_star, rep.disk_radius)
    Path(f"{out}.svg").write_text(render_svg(primary, spec))
    write_json(f"{out}.meta.json", meta)
    return meta


def cmd_outlier_scan(args) -> dict:
    config = RunConfig(args.n, args.ensemble, args.seed)
    t_grid = parse_t_grid(args.t_grid, args.n)
    params = DomainParams(epsilon=args.epsilon, zeta=args.zeta, n=args.n)
    curve = emergence_scan(config, t_grid, args.trials, params)
    out = _prefix(args.out)
    curve.write_csv(f"{out}.csv")
    summary = dict(run_metadata(config), **curve.to_dict())
    write_json(f"{out}.json", summary)
    return summary


def cmd_local_law(args) -> dict:
    if args.fixture:
        rin, n = FIXTURES[args.fixture], 2
        meta = {"fixture": args.fixture, "n": n}
    else:
        config = RunConfig(args.n, args.ensemble, args.seed)
        data = draw_spectral(config)
        rin, n = data.rin, args.n
        meta = run_metadata(config, data.resampled)
    if args.points is not None:
        grid = _parse_points(args.points)
    else:
        if args.eta_count < 1 or args.e_count < 1:
            raise UsageError("empty grid")
        grid = local_law_grid(n, args.eta_count, args.e_count, args.e_max, args.eta_lo_exp, args.eta_hi)
    if grid.size == 0:
        raise UsageError("empty grid")
    try:
        report = local_law_error(rin, grid, n, zeta=args.zeta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = _prefix(args.out)
    report.write_csv(f"{out}.csv")
    meta.update(report.to_dict())
    meta["threshold_n_0.15"] = float(n) ** 0.15
    write_json(f"{out}.json", meta)
    return meta


def cmd_origin_hist(args) -> dict:
    config = RunConfig(args.n, args.ensemble, args.seed)
    hist = origin_histogram(config, args.trials, args.t_final)
    out = _prefix(args.out)
    hist.write_csv(f"{out}.csv")
    summary = dict(run_metadata(config), **hist.to_dict())
    write_json(f"{out}.json", summary)
    return summary


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankone", description="Eigenvalue flow of H + i t v v*.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default):
        sp.add_argument("--n", type=_positive_int, default=n_default)
        sp.add_argument("--ensemble", choices=ENSEMBLES, default="gue")
        sp.add_argument("--seed", type=_nonneg_int, default=0)
        sp.add_argument("--out", required=True, help="output prefix")

    sp = sub.add_parser("trace", help="trajectories, metadata and SVG plot")
    common(sp, 100)
    sp.add_argument("--t-max", type=_positive_float, default=3.0)
    sp.add_argument("--steps", type=_positive_int, default=300)
    sp.add_argument("--method", choices=("continuation", "ode", "both"), default="continuation")
    sp.add_argument("--ode-dt", type=_positive_float, default=5e-4)
    sp.add_argument("--epsilon", type=float, default=0.3, help="for the outlier-disk overlay")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("outlier-scan", help="Monte Carlo separation frequency")
    common(sp, 500)
    sp.add_argument("--trials", type=_positive_int, default=20)
    sp.add_argument("--t-grid", default="auto", help="'auto', 'rel:c1,c2,..' or 't1,t2,..'")
    sp.add_argument("--epsilon", type=float, default=0.3)
    sp.add_argument("--zeta", type=float, default=0.2)
    sp.set_defaults(func=cmd_outlier_scan)

    sp = sub.add_parser("local-law", help="empirical resolvent error on a grid")
    common(sp, 1000)
    sp.add_argument("--fixture", choices=sorted(FIXTURES))
    sp.add_argument("--points", help="explicit comma-separated complex points, e.g. '1j,0.5+1j'")
    sp.add_argument("--eta-count", type=int, default=5)
    sp.add_argument("--e-count", type=int, default=10)
    sp.add_argument("--e-max", type=_positive_float, default=2.5)
    sp.add_argument("--eta-lo-exp", type=float, default=-0.9)
    sp.add_argument("--eta-hi", type=_positive_float, default=1.0)
    sp.add_argument("--zeta", type=float, default=0.1)
    sp.set_defaults(func=cmd_local_law)

    sp = sub.add_parser("origin-hist", help="which mu_j the outlier starts from")
    common(sp, 100)
    sp.add_argument("--trials", type=_positive_int, default=20)
    sp.add_argument("--t-final", type=_positive_float, default=100.0)
    sp.set_defaults(func=cmd_origin_hist)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (UsageError, ConfigError, DimensionError) as exc:
        parser.print_usage(sys.stderr)
        print(f"rankone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        state = getattr(exc, "state", None)
        if state is not None:
            report["state"] = state
        text = dumps(report)
        sys.stderr.write(text)
        try:
            Path(f"{args.out}.error.json").write_text(text)
        except OSError:
            pass
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
