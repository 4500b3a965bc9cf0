"""Weighted resolvent W(z) = sum_j c_j / (mu_j - z) and the semicircle transform."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from rankone.domains import DomainParams, in_S, t_star  # noqa: F401
from rankone.rmt import ResolventInput

POLE_TOL = 1e-13
_COMPENSATED_ABOVE = 512


class PoleProximityError(ArithmeticError):
    pass


class DomainError(ValueError):
    pass


def _check_pole(mus: np.ndarray, z: complex) -> None:
    d = np.min(np.abs(mus - z))
    if d < POLE_TOL:
        raise PoleProximityError(f"z={z} within {d:.3e} of a pole")


def _sum(terms: np.ndarray) -> complex:
    if terms.size > _COMPENSATED_ABOVE:
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    s = 0j
    for x in terms:
        s += x
    return s


def weighted_resolvent(rin: ResolventInput, z: complex) -> complex:
    z = complex(z)
    _check_pole(rin.mus, z)
    return _sum(rin.weights / (rin.mus - z))


def weighted_resolvent_deriv(rin: ResolventInput, z: complex) -> complex:
    z = complex(z)
    _check_pole(rin.mus, z)
    return _sum(rin.weights / (rin.mus - z) ** 2)


def resolvent_many(mus: np.ndarray, weights: np.ndarray, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """W and W' at every point of ``zs`` (vectorized, pairwise summation)."""
    inv = 1.0 / (mus[None, :] - zs[:, None])
    cw = weights * inv
    return cw.sum(axis=1), (cw * inv).sum(axis=1)


def m_frak(z: complex) -> complex:
    """(-z + sqrt(z^2 - 4)) / 2 with Im sqrt(z^2 - 4) > 0.

    Holomorphic off the rays (-inf, -2] and [2, inf); equals the semicircle
    Stieltjes transform in the upper half-plane.
    """
    z = complex(z)
    if z.imag == 0 and abs(z.real) >= 2:
        raise DomainError(f"m_frak undefined on the cut rays, z={z}")
    s = np.sqrt(z * z - 4)
    if s.imag < 0:
        s = -s
    a = -z + s
    b = -z - s
    # the two roots multiply to 1; take the reciprocal of the big one to avoid cancellation
    if abs(a) >= abs(b):
        return complex(a / 2)
    return complex(2 / b)


def m_frak_deriv(z: complex) -> complex:
    m = m_frak(z)
    return -m / (2 * m + complex(z))


@dataclass
class LocalLawReport:
    grid: np.ndarray
    raw_error: np.ndarray
    normalized_error: np.ndarray
    n: int
    zeta: float

    @property
    def sup_normalized(self) -> float:
        # first maximal index wins ties
        return float(self.normalized_error[int(np.argmax(self.normalized_error))])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "zeta": self.zeta,
            "points": int(self.grid.size),
            "sup_normalized": self.sup_normalized,
            "sup_raw": float(np.max(self.raw_error)),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "raw_error", "normalized_error"])
            for z, r, q in zip(self.grid, self.raw_error, self.normalized_error):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(r)), repr(float(q))])


def local_law_error(rin: ResolventInput, grid, n: int, zeta: float = 0.1) -> LocalLawReport:
    """Empirical isotropic local-law error |W - m| on ``grid``.

    The normalized error multiplies by sqrt(n eta) (1 + eta^2)^(3/4), so a
    bound of N^eps on it is the local-law statement.
    """
    grid = np.asarray(list(grid), dtype=complex)
    if grid.size == 0:
        raise ValueError("empty grid")
    params = DomainParams(epsilon=0.5, zeta=zeta, n=n)
    for k, z in enumerate(grid):
        if not in_S(z, params):
            raise DomainError(f"grid point {k} ({z}) is outside S_zeta (zeta={zeta}, n={n})")
    raw = np.array([abs(weighted_resolvent(rin, z) - m_frak(z)) for z in grid])
    eta = grid.imag
    normalized = raw * np.sqrt(n * eta) * (1 + eta**2) ** 0.75
    return LocalLawReport(grid, raw, normalized, n, zeta)


def local_law_grid(n: int, n_eta: int = 5, n_E: int = 10, e_max: float = 2.5, eta_lo_exp: float = -0.9, eta_hi: float = 1.0):
    """Log-spaced eta in [n^eta_lo_exp, eta_hi] times linear E in [-e_max, e_max]."""
    if n_eta < 1 or n_E < 1:
        raise ValueError("grid must be non-empty")
    etas = np.geomspace(float(n) ** eta_lo_exp, eta_hi, n_eta)
    Es = np.linspace(-e_max, e_max, n_E)
    return np.array([complex(E, h) for h in etas for E in Es])
