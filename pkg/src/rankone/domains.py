"""Spectral domains for the confinement and outlier checks.

All tests are written as ``eta * (...) < N^(eps-1)`` so that, in floating
point, membership in the elliptic domain still implies membership in the
hyperbolic one.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

ETA_MAX = 1e4  # finite stand-in for N^100


@dataclass(frozen=True)
class DomainParams:
    epsilon: float = 0.3
    zeta: float = 0.2
    t_cap: float = 3.0
    n: int = 100

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.zeta < 1:
            raise ValueError(f"zeta must lie in (0, 1), got {self.zeta}")
        if self.t_cap < 2:
            raise ValueError(f"t_cap must be >= 2, got {self.t_cap}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def eps_scale(self) -> float:
        """N^eps / N."""
        return float(self.n) ** (self.epsilon - 1.0)

    @property
    def zeta_scale(self) -> float:
        """N^zeta / N, the height of the rectangle R."""
        return float(self.n) ** (self.zeta - 1.0)

    def to_dict(self) -> dict:
        return asdict(self)


def t_star(t: float) -> float:
    if not t > 0:
        raise ValueError(f"t_star needs t > 0, got {t}")
    return t - 1.0 / t


def _out(mask):
    mask = np.asarray(mask)
    return bool(mask) if mask.ndim == 0 else mask


def _split(z):
    z = np.asarray(z, dtype=complex)
    return z.real, z.imag


def in_S(z, params: DomainParams, eta_max: float = ETA_MAX):
    """Accepts a scalar or an array of points; arrays give boolean masks."""
    E, eta = _split(z)
    return _out((np.abs(E) < 3) & (params.zeta_scale <= eta) & (eta < eta_max))


def in_R(z, params: DomainParams):
    E, eta = _split(z)
    return _out((np.abs(E) < 3) & (0 <= eta) & (eta < params.zeta_scale))


def in_elliptic(z, t: float, params: DomainParams):
    if not 0 < t < params.t_cap:
        raise ValueError(f"t={t} outside (0, t_cap={params.t_cap})")
    E, eta = _split(z)
    box = (np.abs(E) < 3) & (0 <= eta) & (eta < params.t_cap)
    # eta = 0: right-hand side is +inf
    ineq = (eta == 0) | (eta * (E * E + (eta - t_star(t)) ** 2) < params.eps_scale)
    return _out(box & ineq)


def in_hyperbolic(z, params: DomainParams):
    E, eta = _split(z)
    return _out((np.abs(E) < 3) & (0 <= eta) & (eta < params.t_cap) & (eta * (E * E) < params.eps_scale))


def elliptic_margin(z, t: float, params: DomainParams):
    """Signed slack of the elliptic inequality (positive inside)."""
    E, eta = _split(z)
    return params.eps_scale - eta * (E * E + (eta - t_star(t)) ** 2)


def hyperbolic_margin(z, params: DomainParams):
    E, eta = _split(z)
    return params.eps_scale - eta * E * E


def elliptic_components_on_line(E: float, t: float, params: DomainParams, samples: int = 20001) -> int:
    """Number of connected pieces of the elliptic domain on the vertical line Re z = E.

    Scans eta on a log grid in (0, t_cap) and counts runs of membership;
    eta = 0 always belongs, so the bottom run starts at the axis.
    """
    etas = np.concatenate(([0.0], np.geomspace(1e-12, params.t_cap * (1 - 1e-12), samples)))
    inside = in_elliptic(E + 1j * etas, t, params)
    starts = np.flatnonzero(inside & ~np.concatenate(([False], inside[:-1])))
    return int(starts.size)
