import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankone.rmt import (
    RNG_NAME,
    ConfigError,
    DimensionError,
    RunConfig,
    SpectralData,
    draw_spectral,
    hermitian_eigen,
    overlaps,
    sample_gue,
    sample_matrix,
    sample_unit_vector,
    sample_wigner,
)


def test_gue_2x2_hermitian():
    H = sample_gue(2, seed=0)
    assert H[1, 0] == np.conj(H[0, 1])
    assert np.all(H.diagonal().imag == 0)


def test_gue_frozen_draw():
    H = sample_gue(2, seed=0)
    assert H[0, 0].real == pytest.approx(-0.22242662, abs=1e-8)
    assert H[0, 1] == pytest.approx(-0.40127295 + 0.22875964j, abs=1e-8)


def test_gue_rejects_small_n():
    with pytest.raises(DimensionError):
        sample_gue(1)


def test_gue_offdiag_variance():
    n = 500
    H = sample_gue(n, seed=3)
    off = np.abs(H[np.triu_indices(n, 1)]) ** 2
    # |h|^2 is exponential with mean 1/n, so sd of the mean is (1/n)/sqrt(count)
    assert abs(off.mean() - 1 / n) < 3 * (1 / n) / np.sqrt(off.size)


def test_gue_edge():
    hits = sum(1.8 < hermitian_eigen(sample_gue(500, seed=s))[0][-1] < 2.2 for s in range(5))
    assert hits == 5


def test_wigner_gaussian_complex_is_gue():
    assert np.array_equal(sample_wigner(2, "gaussian-complex", 7), sample_gue(2, 7))


def test_wigner_uniform_variance_and_spectrum():
    n = 300
    H = sample_wigner(n, "uniform-complex", seed=1)
    off = np.abs(H[np.triu_indices(n, 1)]) ** 2
    assert abs(off.mean() - 1 / n) < 3 * off.std() / np.sqrt(off.size)
    mus, _ = hermitian_eigen(H)
    assert np.min(np.diff(mus)) > 1e-12


def test_wigner_unknown_law():
    with pytest.raises(ConfigError):
        sample_wigner(4, "cauchy")


def test_unit_vector():
    v = sample_unit_vector(1, seed=0)
    assert abs(abs(v[0]) - 1) < 1e-15
    assert not np.allclose(sample_unit_vector(100, 0), sample_unit_vector(100, 1))


def test_unit_vector_first_coordinate_mean():
    n, trials = 1000, 200
    x = np.array([abs(sample_unit_vector(n, s)[0]) ** 2 for s in range(trials)])
    # |v_1|^2 is roughly exponential with mean 1/n
    assert abs(x.mean() - 1 / n) < 3 * (1 / n) / np.sqrt(trials)


def test_eigen_diagonal():
    mus, U = hermitian_eigen(np.diag([-1.0, 1.0]).astype(complex))
    assert np.allclose(mus, [-1, 1])
    assert np.allclose(np.abs(U), np.eye(2))


def test_eigen_offdiag():
    mus, _ = hermitian_eigen(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(mus, [-1, 1], atol=1e-15)


def test_eigen_reconstruction():
    H = sample_gue(8, seed=2)
    mus, U = hermitian_eigen(H)
    assert np.max(np.abs(U @ np.diag(mus) @ U.conj().T - H)) < 1e-12
    assert np.max(np.abs(U.conj().T @ U - np.eye(8))) < 8 * 1e-13 * np.linalg.norm(H)


def test_overlaps_examples():
    _, U = hermitian_eigen(sample_gue(5, seed=4))
    assert np.allclose(overlaps(U, U[:, 0]), [1, 0, 0, 0, 0], atol=1e-15)
    w = overlaps(U, (U[:, 0] + U[:, 1]) / np.sqrt(2))
    assert np.allclose(w, [0.5, 0.5, 0, 0, 0], atol=1e-15)
    with pytest.raises(DimensionError):
        overlaps(U, np.ones(4))


@given(st.integers(2, 60), st.integers(0, 2**32))
def test_weights_sum_to_one(n, seed):
    d = draw_spectral(RunConfig(n, seed=seed))
    assert abs(d.weights.sum() - 1) < 1e-12
    assert np.all((d.weights >= 0) & (d.weights <= 1))
    assert np.all(np.diff(d.mus) > 0)


@given(st.sampled_from(["gue", "wigner-real", "wigner-complex-uniform"]), st.integers(0, 10**6))
def test_determinism(ensemble, seed):
    cfg = RunConfig(6, ensemble, seed)
    assert np.array_equal(sample_matrix(cfg), sample_matrix(cfg))
    H = sample_matrix(cfg)
    assert np.array_equal(H, H.conj().T)


def test_frozen_spectral_draw():
    d = draw_spectral(RunConfig(4, seed=0))
    assert np.allclose(d.mus, [-1.9863673016044316, -0.7828251807072425, 0.5306986101672376, 2.042372943532197],
                       rtol=0, atol=1e-12)
    assert np.allclose(d.weights, [0.3063605356187394, 0.28599832120707114, 0.19128778515429473, 0.2163533580198951],
                       rtol=0, atol=1e-12)
    assert d.resampled == ()


def test_spectral_data_is_frozen():
    d = draw_spectral(RunConfig(3, seed=1))
    with pytest.raises(ValueError):
        d.mus[0] = 0.0


def test_degenerate_spectrum_resamples(monkeypatch):
    import rankone.rmt as rmt

    real = rmt.sample_matrix
    calls = []

    def fake(cfg):
        calls.append(cfg.seed)
        return np.eye(cfg.n, dtype=complex) if len(calls) == 1 else real(cfg)

    monkeypatch.setattr(rmt, "sample_matrix", fake)
    d = rmt.draw_spectral(RunConfig(3, seed=10))
    assert calls == [10, 11]
    assert d.resampled[0]["seed"] == 10


def test_run_config():
    cfg = RunConfig(5, seed=9)
    assert cfg.to_dict() == {"n": 5, "ensemble": "gue", "seed": 9, "rng": RNG_NAME}
    with pytest.raises(ConfigError):
        RunConfig(5, "goe")
    with pytest.raises(DimensionError):
        RunConfig(0)
