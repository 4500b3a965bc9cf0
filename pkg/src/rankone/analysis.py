"""Finite-N checks of the confinement, outlier and small/large-t statements.

Every check here returns a report; nothing raises on a failed bound. The
acceptance suite decides what counts as a pass.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from rankone.domains import (
    DomainParams,
    elliptic_margin,
    hyperbolic_margin,
    in_elliptic,
    in_hyperbolic,
    in_R,
    t_star,
)
from rankone.rmt import RunConfig, SpectralData, draw_spectral
from rankone.trajectory import (
    TimeGrid,
    TrackOptions,
    TrajectoryBundle,
    TrajectoryCollisionError,
    outlier_label,
    trace_trajectories,
)

log = logging.getLogger(__name__)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("RANKONE_THREADS", "1")))
    except ValueError:
        return 1


def map_trials(fn, items):
    """Ordered map over ``items`` on up to RANKONE_THREADS worker threads."""
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# outlier classification


@dataclass
class OutlierReport:
    t: float
    t_star: float
    outlier_index: int | None
    outlier_value: complex | None
    disk_radius: float
    in_disk: bool
    bulk_bound: float
    bulk_max_im: float
    separated: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        v = self.outlier_value
        d["outlier_value"] = None if v is None else [v.real, v.imag]
        return d


def classify_outlier(lambdas, t: float, params: DomainParams) -> OutlierReport:
    """Is there exactly one eigenvalue in D(i t*, N^(eps/4)/sqrt(N t*)) with
    all the others below N^eps / (N t*^2)?"""
    if not t > 1:
        raise ValueError(f"classify_outlier needs t > 1, got {t}")
    lam = np.asarray(lambdas, dtype=complex)
    n = params.n
    ts = t_star(t)
    radius = float(n) ** (params.epsilon / 4) / np.sqrt(n * ts)
    bulk_bound = float(n) ** params.epsilon / (n * ts * ts)
    inside = np.flatnonzero(np.abs(lam - 1j * ts) < radius)
    if inside.size == 1:
        j = int(inside[0])
        others = np.delete(lam, j)
        bulk_max = float(others.imag.max()) if others.size else -np.inf
        sep = bool(bulk_max < bulk_bound)
        return OutlierReport(t, ts, j, complex(lam[j]), radius, True, bulk_bound, bulk_max, sep)
    # no unique candidate: report the max-Im eigenvalue for reference
    j = int(np.argmax(lam.imag))
    bulk_max = float(np.delete(lam, j).imag.max()) if lam.size > 1 else -np.inf
    return OutlierReport(t, ts, None, None, radius, bool(inside.size > 0), bulk_bound, bulk_max, False)


# ---------------------------------------------------------------------------
# bundle-level checks


@dataclass
class CheckReport:
    name: str
    checked_points: int = 0
    violations: int = 0
    worst_margin: float = np.inf
    worst_at: tuple | None = None  # (t, j, re, im)
    counts: dict = field(default_factory=dict)
    examples: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def _record(self, t, lam, bad, margins):
        self.checked_points += lam.size
        nbad = int(np.sum(bad))
        self.violations += nbad
        j = int(np.argmin(margins))
        if margins[j] < self.worst_margin:
            self.worst_margin = float(margins[j])
            self.worst_at = (float(t), j, float(lam[j].real), float(lam[j].imag))
        for k in np.flatnonzero(bad)[: max(0, 10 - len(self.examples))]:
            self.examples.append((float(t), int(k), float(lam[k].real), float(lam[k].imag)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def check_confinement(bundle: TrajectoryBundle, params: DomainParams) -> CheckReport:
    """Membership of every eigenvalue in E_{t,eps} u R_zeta and in H_eps, for 0 < t < t_cap.

    The margin is the slack of the elliptic or the hyperbolic inequality,
    whichever is worse; points in R_zeta count as satisfying the elliptic one.
    """
    rep = CheckReport("confinement", params=params.to_dict())
    ell_bad = hyp_bad = 0
    for t, lam in zip(bundle.times, bundle.lambdas):
        if not 0 < t < params.t_cap:
            continue
        inER = in_elliptic(lam, t, params) | in_R(lam, params)
        inH = in_hyperbolic(lam, params)
        ell_bad += int(np.sum(~inER))
        hyp_bad += int(np.sum(~inH))
        m_ell = np.where(in_R(lam, params), np.inf, elliptic_margin(lam, t, params))
        margins = np.minimum(m_ell, hyperbolic_margin(lam, params))
        rep._record(t, lam, ~(inER & inH), margins)
    rep.counts = {"outside_E_or_R": ell_bad, "outside_H": hyp_bad}
    return rep


def small_t_check(bundle: TrajectoryBundle, params: DomainParams) -> CheckReport:
    """Im bounds below the emergence timescale.

    t < 1 + N^(-1/3-eps):  Im lambda < N^(-1/3+eps)
    t < 1 - N^(-1/3+eps):  Im lambda < max(N^eps / (N t*^2), N^zeta / N)
    """
    n = float(params.n)
    eps = params.epsilon
    t_hi = 1 + n ** (-1 / 3 - eps)
    t_lo = 1 - n ** (-1 / 3 + eps)
    rep = CheckReport("small_t", params=params.to_dict())
    first = second = 0
    for t, lam in zip(bundle.times, bundle.lambdas):
        if not 0 < t < t_hi:
            continue
        bound = n ** (-1 / 3 + eps)
        if t < t_lo:
            ts = t_star(t)
            bound = min(bound, max(n**eps / (n * ts * ts), n**params.zeta / n))
        bad = lam.imag >= bound
        if t < t_lo:
            second += int(np.sum(bad))
        else:
            first += int(np.sum(bad))
        rep._record(t, lam, bad, bound - lam.imag)
    rep.counts = {"t_hi": t_hi, "t_lo": t_lo, "violations_first_bound": first, "violations_second_bound": second}
    return rep


def large_t_check(bundle: TrajectoryBundle, params: DomainParams, t_max: float = 1e3) -> CheckReport:
    """For t in [t_cap, t_max]: max-Im eigenvalue within N^(-1/2+eps) of i t*, all others in R_zeta."""
    n = float(params.n)
    radius = n ** (-0.5 + params.epsilon)
    rep = CheckReport("large_t", params=params.to_dict())
    disk_bad = rect_bad = 0
    for t, lam in zip(bundle.times, bundle.lambdas):
        if not params.t_cap <= t <= t_max:
            continue
        j = int(np.argmax(lam.imag))
        disk_margin = radius - abs(lam[j] - 1j * t_star(t))
        margins = np.minimum(params.zeta_scale - lam.imag, 3 - np.abs(lam.real))
        bad = ~in_R(lam, params)
        margins[j], bad[j] = disk_margin, disk_margin <= 0
        disk_bad += int(bad[j])
        rect_bad += int(np.sum(bad)) - int(bad[j])
        rep._record(t, lam, bad, margins)
    rep.counts = {"outlier_outside_disk": disk_bad, "others_outside_R": rect_bad, "disk_radius": radius}
    return rep


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class EmergenceCurve:
    times: np.ndarray
    frequencies: np.ndarray
    trials: int
    n: int
    separated: np.ndarray  # (trials, len(times)) booleans
    failures: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "frequency", "trials", "n"])
            for t, f in zip(self.times, self.frequencies):
                w.writerow([repr(float(t)), repr(float(f)), self.trials, self.n])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "t": [float(t) for t in self.times],
            "frequency": [float(f) for f in self.frequencies],
            "failures": self.failures,
            "params": self.params,
        }


def _trace_to(data: SpectralData, t_points, dt_max: float = 0.05) -> TrajectoryBundle:
    t_points = np.asarray(t_points, dtype=float)
    t_max = float(t_points.max())
    steps = max(1, int(np.ceil(t_max / dt_max)))
    grid = TimeGrid.with_points(t_max, steps, t_points)
    return trace_trajectories(data.rin, grid, TrackOptions())


def default_t_grid(n: int) -> np.ndarray:
    return 1 + np.array([0.1, 0.5, 1.0, 2.0, 5.0]) * float(n) ** (-1 / 3)


def emergence_scan(config: RunConfig, t_grid, trials: int, params: DomainParams, dt_max: float = 0.05) -> EmergenceCurve:
    """Separation frequency over ``trials`` independent draws (seeds base + k).

    Times t <= 1 never count as separated. A trial whose continuation fails
    counts as not separated and is listed in ``failures``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    positive = t_grid[t_grid > 1]

    def one(k):
        sep = np.zeros(t_grid.size, dtype=bool)
        if positive.size == 0:
            return sep, None
        cfg = config.with_seed(config.seed + k)
        try:
            data = draw_spectral(cfg)
            bundle = _trace_to(data, positive, dt_max)
        except (TrajectoryCollisionError, ArithmeticError) as exc:
            return sep, {"trial": k, "seed": cfg.seed, "error": str(exc)}
        for i, t in enumerate(t_grid):
            if t > 1:
                sep[i] = classify_outlier(bundle.at(t), t, params).separated
        return sep, None

    results = map_trials(one, range(trials))
    separated = np.array([r[0] for r in results]).reshape(trials, t_grid.size)
    failures = [r[1] for r in results if r[1] is not None]
    freq = separated.mean(axis=0) if trials else np.zeros(t_grid.size)
    return EmergenceCurve(t_grid, freq, trials, config.n, separated, failures, params.to_dict())


@dataclass
class OriginHistogram:
    n: int
    trials: int
    t_final: float
    counts: np.ndarray  # counts[r - 1] = trials whose outlier started at the r-th smallest mu
    ranks: list
    unstable: int = 0
    failures: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "count"])
            for r, c in enumerate(self.counts, start=1):
                w.writerow([r, int(c)])

    def to_dict(self) -> dict:
        center = (self.n + 1) / 2
        return {
            "n": self.n,
            "trials": self.trials,
            "t_final": self.t_final,
            "ranks": self.ranks,
            "distance_from_center": [abs(r - center) for r in self.ranks],
            "argmax_changed_in_last_decade": self.unstable,
            "failures": self.failures,
        }


def outlier_origin(rin, t_final: float, steps: int = 200) -> tuple[int, bool]:
    """Label (0-based, ascending mu order) of the trajectory that becomes the outlier."""
    grid = TimeGrid.geometric(min(0.01, t_final / 10), t_final, steps)
    return outlier_label(trace_trajectories(rin, grid))


def origin_histogram(config: RunConfig, trials: int, t_final: float = 100.0) -> OriginHistogram:
    """Where the outlier comes from; exploratory, nothing asserted."""

    def one(k):
        cfg = config.with_seed(config.seed + k)
        try:
            data = draw_spectral(cfg)
            j, stable = outlier_origin(data.rin, t_final)
        except (TrajectoryCollisionError, ArithmeticError) as exc:
            return None, {"trial": k, "seed": cfg.seed, "error": str(exc)}
        return (j, stable), None

    results = map_trials(one, range(trials))
    counts = np.zeros(config.n, dtype=int)
    ranks, failures, unstable = [], [], 0
    for res, fail in results:
        if fail is not None:
            failures.append(fail)
            continue
        j, stable = res
        counts[j] += 1
        ranks.append(j + 1)
        unstable += not stable
    return OriginHistogram(config.n, trials, t_final, counts, ranks, unstable, failures)
