"""Eigenvalue trajectories of G_t = H + i t v v^*.

Three independent routes to the same curves:

* ``trace_trajectories``: Newton continuation on W(z) = i/t, one root per
  eigenvalue of H, labels carried along the time grid.
* ``integrate_ode``: RK4 on the closed eigenvalue ODE.
* ``oracle_eigen``: all roots of det(G_t - z) by Durand-Kerner, with the
  characteristic polynomial kept in product/sum form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from rankone.resolvent import POLE_TOL, resolvent_many, weighted_resolvent
from rankone.rmt import ResolventInput, hermitian_eigen

log = logging.getLogger(__name__)

COLLISION_TOL = 1e-10
NEWTON_MAX_ITER = 50
RESIDUAL_TOL = 1e-12
STEP_TOL = 1e-13
DT_MIN = 1e-9
_FLOOR_ULPS = 16


class SingularityError(ArithmeticError):
    def __init__(self, t, gap):
        super().__init__(f"eigenvalues not distinct at t={t} (min gap {gap:.3e})")
        self.t = t
        self.gap = gap


class StepFailure(ArithmeticError):
    """Newton did not produce an acceptable corrected state; the caller should shrink the step."""


class CollisionError(StepFailure):
    def __init__(self, j, k, t, distance):
        super().__init__(f"roots {j} and {k} within {distance:.3e} at t={t}")
        self.j, self.k, self.t, self.distance = j, k, t, distance


class TrajectoryCollisionError(ArithmeticError):
    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


# ---------------------------------------------------------------------------
# grids and bundles


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray
    dt_max: float | None = None

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 1 or p.size < 1 or p[0] != 0.0:
            raise ValueError("time grid must be 1-d and start at t=0")
        if np.any(np.diff(p) <= 0):
            raise ValueError("time grid must be strictly increasing")
        dt_max = self.dt_max
        if dt_max is None:
            dt_max = float(np.max(np.diff(p))) if p.size > 1 else 1.0
        elif p.size > 1 and np.max(np.diff(p)) > dt_max * (1 + 1e-12):
            raise ValueError("grid spacing exceeds dt_max")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "dt_max", float(dt_max))

    @classmethod
    def uniform(cls, t_max: float, steps: int) -> "TimeGrid":
        return cls(np.linspace(0.0, t_max, steps + 1))

    @classmethod
    def with_points(cls, t_max: float, steps: int, extra) -> "TimeGrid":
        """Uniform grid with extra times merged in."""
        pts = np.union1d(np.linspace(0.0, t_max, steps + 1), np.asarray(extra, dtype=float))
        return cls(pts, dt_max=t_max / steps)

    @classmethod
    def geometric(cls, t_first: float, t_max: float, steps: int) -> "TimeGrid":
        return cls(np.concatenate(([0.0], np.geomspace(t_first, t_max, steps))))

    def __len__(self):
        return self.points.size


@dataclass
class TrajectoryBundle:
    times: np.ndarray
    lambdas: np.ndarray  # shape (len(times), n); column j starts at mu_j
    method: str
    newton_iters: np.ndarray = field(default=None)
    min_distance: np.ndarray = field(default=None)
    anchors: np.ndarray | None = None  # continuation only: lambdas = mus[anchors] + offsets
    offsets: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.lambdas = np.asarray(self.lambdas, dtype=complex)
        if self.min_distance is None:
            self.min_distance = np.array([min_pairwise_distance(l) for l in self.lambdas])
        if self.newton_iters is None:
            self.newton_iters = np.zeros(self.times.size, dtype=int)

    @property
    def n(self) -> int:
        return self.lambdas.shape[1]

    def at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[k], t, rtol=0, atol=1e-12):
            raise KeyError(f"time {t} not on the grid")
        return self.lambdas[k]

    def diagnostics(self) -> dict:
        return {
            "method": self.method,
            "points": int(self.times.size),
            "newton_iterations_total": int(np.sum(self.newton_iters)),
            "min_pairwise_distance": float(np.min(self.min_distance[1:])) if self.times.size > 1 else None,
        }


def min_pairwise_distance(z: np.ndarray) -> float:
    z = np.asarray(z)
    if z.size < 2:
        return np.inf
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def _nearest(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    k = np.argmin(d, axis=1)
    return d[np.arange(z.size), k], k


# ---------------------------------------------------------------------------
# secular equation and the ODE right-hand side


def secular(rin: ResolventInput, t: float, z: complex) -> complex:
    """1 + i t W(z); vanishes exactly on the spectrum of G_t."""
    if not t > 0:
        raise ValueError(f"secular needs t > 0, got {t}")
    return 1 + 1j * t * weighted_resolvent(rin, z)


def ode_rhs(lambdas: np.ndarray, t: float, weights=None) -> np.ndarray:
    """Velocities of the eigenvalues.

    At t = 0 this is i c_j. For t > 0,
        lambda_j' = (i Im lambda_j / t) prod_{k != j} (1 + 2i Im lambda_k / (lambda_j - lambda_k)).
    """
    lam = np.asarray(lambdas, dtype=complex)
    if t == 0:
        if weights is None:
            raise ValueError("weights are required at t=0")
        return 1j * np.asarray(weights, dtype=float)
    if t < 0:
        raise ValueError(f"ode_rhs needs t >= 0, got {t}")
    n = lam.size
    if n == 1:
        return np.array([1j * lam[0].imag / t])
    diff = lam[:, None] - lam[None, :]
    gap = np.abs(diff)
    np.fill_diagonal(gap, np.inf)
    if gap.min() <= 1e-12:
        raise SingularityError(t, float(gap.min()))
    np.fill_diagonal(diff, 1.0)
    factors = 1 + 2j * lam.imag[None, :] / diff
    np.fill_diagonal(factors, 1.0)
    return 1j * lam.imag / t * np.prod(factors, axis=1)


# ---------------------------------------------------------------------------
# continuation


@dataclass(frozen=True)
class TrackOptions:
    dt_initial: float = 0.01
    dt_min: float = DT_MIN
    dt_max: float | None = None
    grow_after: int = 5
    collision_tol: float = COLLISION_TOL


def resolvent_anchored(mus, weights, anchors, offsets):
    """W and W' at z_j = mu[anchors[j]] + offsets[j].

    The anchored term is evaluated as c / (-offset), so a root sitting next
    to its pole keeps full relative accuracy.
    """
    denom = (mus[None, :] - mus[anchors][:, None]) - offsets[:, None]
    denom[np.arange(anchors.size), anchors] = -offsets
    inv = 1.0 / denom
    cw = weights * inv
    return cw.sum(axis=1), (cw * inv).sum(axis=1), np.min(np.abs(denom), axis=1)


def _reanchor(mus, anchors, offsets):
    """Move each root's anchor to its nearest pole."""
    z = mus[anchors] + offsets
    new = np.abs(mus[None, :] - z[:, None]).argmin(axis=1)
    moved = new != anchors
    if np.any(moved):
        offsets = offsets.copy()
        offsets[moved] = (mus[anchors[moved]] - mus[new[moved]]) + offsets[moved]
    return new, offsets


def _newton(mus, weights, anchors, offsets, t):
    """Vectorized Newton on W(z) - i/t in anchored coordinates, iterating only on unconverged roots."""
    d = offsets.copy()
    target = 1j / t
    active = np.arange(d.size)
    iters = 0
    for it in range(1, NEWTON_MAX_ITER + 1):
        iters = it
        da = d[active]
        W, dW, dist = resolvent_anchored(mus, weights, anchors[active], da)
        if np.min(dist) < POLE_TOL:
            raise StepFailure(f"Newton iterate hit a pole at t={t}")
        f = W - target
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / dW
        da = da - step
        if not np.all(np.isfinite(da)):
            raise StepFailure(f"non-finite Newton iterate at t={t}")
        d[active] = da
        za = mus[anchors[active]] + da
        res = np.abs(f) * t
        # residual floor: W moves by |W'| * ulp(offset) under rounding
        floor = _FLOOR_ULPS * np.finfo(float).eps * np.abs(dW) * np.abs(da) * t
        done = (res <= np.maximum(RESIDUAL_TOL, floor)) & (np.abs(step) <= STEP_TOL * (1 + np.abs(za)))
        active = active[~done]
        if active.size == 0:
            return d, iters
    raise StepFailure(f"Newton did not converge for {active.size} roots at t={t}")


def _correct(rin, anchors, offsets, pred, t_next, collision_tol):
    d, iters = _newton(rin.mus, rin.weights, anchors, offsets, t_next)
    z = rin.mus[anchors] + d
    if z.size > 1:
        near, k = _nearest(z)
        j = int(np.argmin(near))
        if near[j] < collision_tol:
            raise CollisionError(j, int(k[j]), t_next, float(near[j]))
        if near[j] < 10 * collision_tol:
            raise StepFailure(f"roots {j} and {int(k[j])} approaching ({near[j]:.3e}) at t={t_next}")
        # each root must land closer to its own prediction than to any other root
        jumped = np.abs(z - pred) >= 0.5 * near
        if np.any(jumped):
            raise StepFailure(f"{int(jumped.sum())} roots left their branch at t={t_next}")
    anchors, d = _reanchor(rin.mus, anchors, d)
    return anchors, d, iters


def track_step(rin: ResolventInput, lambda_prev, t_prev: float, t_next: float, velocity=None,
               collision_tol: float = COLLISION_TOL):
    """Advance all roots from t_prev to t_next.

    The predictor is an Euler step with ``velocity`` (the exact ODE velocity
    by default); Newton on W(z) = i/t_next corrects it. Returns
    ``(lambdas, newton_iterations)``. Raises ``StepFailure`` when Newton
    diverges or a root jumps onto another's branch, ``CollisionError``
    when two corrected roots coincide.
    """
    lam = np.asarray(lambda_prev, dtype=complex)
    if not t_next > t_prev >= 0:
        raise ValueError("need 0 <= t_prev < t_next")
    if velocity is None:
        velocity = ode_rhs(lam, t_prev, rin.weights)
    pred = lam + (t_next - t_prev) * velocity
    anchors = np.abs(rin.mus[None, :] - pred[:, None]).argmin(axis=1)
    anchors, d, iters = _correct(rin, anchors, pred - rin.mus[anchors], pred, t_next, collision_tol)
    return rin.mus[anchors] + d, iters


def _velocity(rin, lam, t, prev, collision_tol):
    if t == 0:
        return ode_rhs(lam, 0.0, rin.weights)
    if lam.size == 1 or min_pairwise_distance(lam) > 10 * collision_tol:
        try:
            return ode_rhs(lam, t)
        except SingularityError:
            pass
    t0, lam0 = prev
    return (lam - lam0) / (t - t0)


def trace_trajectories(rin: ResolventInput, grid: TimeGrid, opts: TrackOptions = TrackOptions()) -> TrajectoryBundle:
    """Continuation of all n roots across ``grid`` with adaptive substeps.

    Roots are carried as (nearest pole, offset) pairs; the bundle keeps
    both the rounded eigenvalues and that exact representation. A pole
    with zero weight is an eigenvalue of G_t for every t and stays put.
    """
    support = np.flatnonzero(rin.weights > 0)
    if support.size == rin.mus.size:
        return _trace_support(rin, grid, opts)
    n, m = rin.mus.size, grid.points.size
    lam = np.tile(rin.mus.astype(complex), (m, 1))
    anchors = np.tile(np.arange(n), (m, 1))
    offsets = np.zeros((m, n), dtype=complex)
    iters = np.zeros(m, dtype=int)
    if support.size:
        sub = _trace_support(ResolventInput(rin.mus[support], rin.weights[support]), grid, opts)
        lam[:, support] = sub.lambdas
        anchors[:, support] = support[sub.anchors]
        offsets[:, support] = sub.offsets
        iters = sub.newton_iters
    return TrajectoryBundle(grid.points.copy(), lam, "continuation", iters, anchors=anchors, offsets=offsets)


def _trace_support(rin: ResolventInput, grid: TimeGrid, opts: TrackOptions) -> TrajectoryBundle:
    mus = rin.mus
    dt_max = opts.dt_max or grid.dt_max
    anchors = np.arange(mus.size)
    offs = np.zeros(mus.size, dtype=complex)
    lam = mus.astype(complex)
    t = 0.0
    prev = (0.0, lam)
    h = min(opts.dt_initial, dt_max)
    clean = 0
    out, out_a, out_d = [lam], [anchors], [offs]
    iters_out = [0]
    for target in grid.points[1:]:
        step_iters = 0
        while t < target:
            h_try = min(h, target - t)
            t_next = target if target - (t + h_try) <= 1e-14 * target else t + h_try
            try:
                vel = _velocity(rin, lam, t, prev, opts.collision_tol)
                dpred = offs + (t_next - t) * vel
                new_a, new_d, its = _correct(rin, anchors, dpred, lam + (t_next - t) * vel, t_next,
                                             opts.collision_tol)
            except StepFailure as exc:
                h = h_try / 2
                clean = 0
                if h < opts.dt_min:
                    state = {
                        "t": t,
                        "t_next": t_next,
                        "reason": str(exc),
                        "lambdas": [[z.real, z.imag] for z in lam],
                    }
                    if isinstance(exc, CollisionError):
                        state.update(j=exc.j, k=exc.k, distance=exc.distance)
                    raise TrajectoryCollisionError(f"cannot advance past t={t}: {exc}", state) from exc
                continue
            prev = (t, lam)
            t, anchors, offs = t_next, new_a, new_d
            lam = mus[anchors] + offs
            step_iters += its
            clean += 1
            if clean >= opts.grow_after:
                h = min(2 * h, dt_max)
                clean = 0
        out.append(lam)
        out_a.append(anchors)
        out_d.append(offs)
        iters_out.append(step_iters)
    return TrajectoryBundle(grid.points.copy(), np.array(out), "continuation", np.array(iters_out),
                            anchors=np.array(out_a), offsets=np.array(out_d))


def level_line_residual(rin: ResolventInput, bundle: TrajectoryBundle) -> np.ndarray:
    """|Re W| at every computed eigenvalue for t > 0, shape (len(times) - 1, n).

    Uses the anchored representation when the bundle carries one.
    """
    res = []
    for k in range(1, bundle.times.size):
        if bundle.anchors is not None:
            W = resolvent_anchored(rin.mus, rin.weights, bundle.anchors[k], bundle.offsets[k])[0]
        else:
            W = resolvent_many(rin.mus, rin.weights, bundle.lambdas[k])[0]
        res.append(np.abs(W.real))
    return np.array(res)


def outlier_label(bundle: TrajectoryBundle) -> tuple[int, bool]:
    """Index of the max-Im trajectory at the final time, and whether that
    argmax was stable over the last decade of t (times >= t_final / 10)."""
    j = int(np.argmax(bundle.lambdas[-1].imag))
    tail = bundle.times >= bundle.times[-1] / 10
    tail &= bundle.times > 0
    stable = bool(np.all(np.argmax(bundle.lambdas[tail].imag, axis=1) == j))
    return j, stable


# ---------------------------------------------------------------------------
# ODE


def integrate_ode(mus, weights, grid: TimeGrid, dt: float | None = None) -> TrajectoryBundle:
    """Classical RK4 on the eigenvalue ODE, recorded at the grid points.

    With ``dt`` given, each grid interval is split into ceil(interval/dt)
    equal substeps; otherwise the grid itself is the step sequence.
    """
    weights = np.asarray(weights, dtype=float)
    lam = np.asarray(mus, dtype=float).astype(complex)
    out = [lam]
    pts = grid.points
    t = 0.0
    for target in pts[1:]:
        m = 1 if dt is None else max(1, int(np.ceil((target - t) / dt - 1e-9)))
        h = (target - t) / m
        for s in range(m):
            ts = t + s * h
            try:
                k1 = ode_rhs(lam, ts, weights)
                k2 = ode_rhs(lam + 0.5 * h * k1, ts + 0.5 * h)
                k3 = ode_rhs(lam + 0.5 * h * k2, ts + 0.5 * h)
                k4 = ode_rhs(lam + h * k3, ts + h)
            except SingularityError as exc:
                raise SingularityError(ts, exc.gap) from exc
            lam = lam + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = target
        out.append(lam)
    return TrajectoryBundle(pts.copy(), np.array(out), "ode")


# ---------------------------------------------------------------------------
# brute-force oracle


def _char_poly(mus, weights, t, z):
    """P(z) = prod_j (mu_j - z) + i t sum_j c_j prod_{k != j} (mu_k - z), for a vector z."""
    d = mus[None, :] - z[:, None]
    n = mus.size
    ones = np.ones((z.size, 1), dtype=complex)
    prefix = np.cumprod(np.concatenate([ones, d[:, :-1]], axis=1), axis=1)
    suffix = np.cumprod(np.concatenate([ones, d[:, :0:-1]], axis=1), axis=1)[:, ::-1]
    excl = prefix * suffix
    full = prefix[:, -1] * d[:, -1] if n else ones[:, 0]
    return full + 1j * t * (excl * weights[None, :]).sum(axis=1)


def oracle_eigen(mus, weights, t: float, max_sweeps: int = 1000) -> np.ndarray:
    """All eigenvalues of G_t (unordered) by Durand-Kerner on the characteristic polynomial."""
    mus = np.asarray(mus, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = mus.size
    if n > 64:
        raise ValueError("oracle is limited to n <= 64")
    if t < 0:
        raise ValueError("oracle needs t >= 0")
    if t == 0:
        return mus.astype(complex)
    lead = (-1.0) ** n
    radius = np.max(np.abs(mus)) + t + 1.0
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    p_scale = np.max(np.abs(_char_poly(mus, weights, t, z)))
    for _ in range(max_sweeps):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        delta = _char_poly(mus, weights, t, z) / (lead * np.prod(diff, axis=1))
        z = z - delta
        if np.all(np.abs(delta) <= 1e-14 * (1 + np.abs(z))):
            break
    else:
        raise ArithmeticError(f"Durand-Kerner did not converge in {max_sweeps} sweeps")
    resid = np.max(np.abs(_char_poly(mus, weights, t, z)))
    if resid > 1e-10 * p_scale:
        raise ArithmeticError(f"oracle residual {resid:.3e} exceeds 1e-10 * {p_scale:.3e}")
    return z


def match_roots(reference, other) -> tuple[np.ndarray, float]:
    """Optimal bipartite matching of ``other`` onto ``reference`` (Hungarian on |a-b|).

    Returns the permuted ``other`` and the max matched distance.
    """
    a = np.asarray(reference)
    b = np.asarray(other)
    cost = np.abs(a[:, None] - b[None, :])
    row, col = linear_sum_assignment(cost)
    perm = np.empty_like(col)
    perm[row] = col
    matched = b[perm]
    return matched, float(np.max(np.abs(a - matched)))


# ---------------------------------------------------------------------------
# t -> infinity


def limit_points(H, v) -> np.ndarray:
    """Eigenvalues of H compressed to the orthogonal complement of v."""
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    n = v.shape[0]
    if n < 2:
        return np.empty(0)
    Q, _ = np.linalg.qr(v, mode="complete")
    B = Q[:, 1:]
    C = B.conj().T @ np.asarray(H) @ B
    C = (C + C.conj().T) / 2
    mus, _ = hermitian_eigen(C)
    return mus
