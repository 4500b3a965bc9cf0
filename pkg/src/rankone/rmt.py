"""Random Hermitian matrices, unit vectors and their spectral data.

Normalization: every ensemble has mean-zero entries with E|h_ij|^2 = 1/n,
diagonal entries real with variance 1/n. The semicircle then lives on
[-2, 2], which is where the branch points of ``m_frak`` sit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

log = logging.getLogger(__name__)

RNG_NAME = "numpy.Philox4x64"
ENSEMBLES = ("gue", "wigner-real", "wigner-complex-uniform")
ENTRY_LAWS = ("gaussian-complex", "uniform-complex", "gaussian-real")

_ENSEMBLE_LAW = {
    "gue": "gaussian-complex",
    "wigner-real": "gaussian-real",
    "wigner-complex-uniform": "uniform-complex",
}

# stream ids inside one seed
_STREAM_MATRIX = 0
_STREAM_VECTOR = 1


class DimensionError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class EigenConvergenceError(ArithmeticError):
    def __init__(self, index, message="eigensolver did not converge"):
        super().__init__(f"{message} (lapack info={index})")
        self.index = index


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream)."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RunConfig:
    n: int
    ensemble: str = "gue"
    seed: int = 0
    rng: str = RNG_NAME

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"n must be >= 1, got {self.n}")
        if self.ensemble not in ENSEMBLES:
            raise ConfigError(f"unknown ensemble {self.ensemble!r}; expected one of {ENSEMBLES}")

    def with_seed(self, seed: int) -> "RunConfig":
        return RunConfig(self.n, self.ensemble, seed, self.rng)

    def to_dict(self) -> dict:
        return {"n": self.n, "ensemble": self.ensemble, "seed": self.seed, "rng": self.rng}


def sample_wigner(n: int, entry_law: str = "gaussian-complex", seed: int = 0) -> np.ndarray:
    """Wigner matrix with variance-1/n entries.

    Laws:
      gaussian-complex   off-diagonal (X + iY)/sqrt(2n), diagonal N(0, 1/n)  (GUE)
      uniform-complex    off-diagonal real/imag parts U(-a, a) with a = sqrt(3/(2n)),
                         diagonal U(-b, b) with b = sqrt(3/n)
      gaussian-real      off-diagonal and diagonal N(0, 1/n), real symmetric
    """
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    if entry_law not in ENTRY_LAWS:
        raise ConfigError(f"unknown entry law {entry_law!r}; expected one of {ENTRY_LAWS}")
    rng = make_rng(seed, _STREAM_MATRIX)
    iu = np.triu_indices(n, k=1)
    m = iu[0].size
    if entry_law == "gaussian-complex":
        off = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2 * n)
        diag = rng.standard_normal(n) / np.sqrt(n)
    elif entry_law == "uniform-complex":
        a = np.sqrt(3.0 / (2 * n))
        off = rng.uniform(-a, a, m) + 1j * rng.uniform(-a, a, m)
        diag = rng.uniform(-np.sqrt(3.0 / n), np.sqrt(3.0 / n), n)
    else:
        off = rng.standard_normal(m).astype(complex) / np.sqrt(n)
        diag = rng.standard_normal(n) / np.sqrt(n)

    H = np.zeros((n, n), dtype=complex)
    H[iu] = off
    H[(iu[1], iu[0])] = off.conj()
    H[np.diag_indices(n)] = diag
    return H


def sample_gue(n: int, seed: int = 0) -> np.ndarray:
    return sample_wigner(n, "gaussian-complex", seed)


def sample_matrix(config: RunConfig) -> np.ndarray:
    return sample_wigner(config.n, _ENSEMBLE_LAW[config.ensemble], config.seed)


def sample_unit_vector(n: int, seed: int = 0) -> np.ndarray:
    """Uniform point on the complex unit sphere (normalized complex Gaussian)."""
    if n < 1:
        raise DimensionError(f"need n >= 1, got {n}")
    rng = make_rng(seed, _STREAM_VECTOR)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def hermitian_eigen(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of H.

    LAPACK heevd does the work: Householder tridiagonalization followed by
    divide and conquer.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {H.shape}")
    if not np.array_equal(H, H.conj().T):
        raise ValueError("matrix is not Hermitian")
    a = np.array(H, dtype=complex, order="F")
    (heevd,) = lapack.get_lapack_funcs(("heevd",), (a,))
    w, v, info = heevd(a, compute_v=1, lower=0)
    if info > 0:
        raise EigenConvergenceError(int(info))
    if info < 0:
        raise ValueError(f"illegal argument {-info} passed to heevd")
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def overlaps(eigvecs: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Overlap weights c_j = |<u_j|v>|^2."""
    eigvecs = np.asarray(eigvecs)
    v = np.asarray(v)
    if eigvecs.shape[0] != v.shape[0]:
        raise DimensionError(f"eigenvectors have dimension {eigvecs.shape[0]}, v has {v.shape[0]}")
    return np.abs(eigvecs.conj().T @ v) ** 2


@dataclass(frozen=True)
class ResolventInput:
    """The (mu_j, c_j) view of the spectral data."""

    mus: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        mus = np.asarray(self.mus, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if mus.ndim != 1 or mus.shape != w.shape:
            raise DimensionError("mus and weights must be 1-d arrays of equal length")
        if np.any(np.diff(mus) < 0):
            raise ValueError("mus must be ascending")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "mus", _frozen(mus))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self) -> int:
        return self.mus.size


@dataclass(frozen=True)
class SpectralData:
    H: np.ndarray
    v: np.ndarray
    mus: np.ndarray
    eigvecs: np.ndarray
    weights: np.ndarray
    config: RunConfig | None = None
    resampled: tuple = field(default=())

    def __post_init__(self):
        for name in ("H", "v", "mus", "eigvecs", "weights"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name))))

    @classmethod
    def from_matrix(cls, H, v, config=None, resampled=()) -> "SpectralData":
        mus, U = hermitian_eigen(H)
        return cls(H, v, mus, U, overlaps(U, v), config, tuple(resampled))

    @property
    def n(self) -> int:
        return self.mus.size

    @property
    def rin(self) -> ResolventInput:
        return ResolventInput(self.mus, self.weights)

    def min_gap(self) -> float:
        return float(np.min(np.diff(self.mus))) if self.n > 1 else np.inf


def draw_spectral(config: RunConfig, max_resamples: int = 16) -> SpectralData:
    """Sample (H, v) for ``config`` and diagonalize.

    Spectra with a gap below 1e-12 * ||H||_F are resampled with seed + 1;
    each such event is recorded in ``SpectralData.resampled``.
    """
    events = []
    seed = config.seed
    for _ in range(max_resamples + 1):
        cfg = config.with_seed(seed)
        if cfg.n == 1:
            H = make_rng(seed, _STREAM_MATRIX).standard_normal((1, 1)).astype(complex)
        else:
            H = sample_matrix(cfg)
        v = sample_unit_vector(cfg.n, seed)
        data = SpectralData.from_matrix(H, v, config, events)
        if data.min_gap() > 1e-12 * np.linalg.norm(H):
            return data
        log.warning("near-degenerate spectrum at seed %d (gap %.3e); resampling", seed, data.min_gap())
        events.append({"seed": seed, "min_gap": data.min_gap()})
        seed += 1
    raise ArithmeticError(f"no non-degenerate spectrum after {max_resamples} resamples")
