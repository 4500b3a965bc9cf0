import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rankone.domains import t_star
from rankone.resolvent import (
    DomainError,
    PoleProximityError,
    local_law_error,
    local_law_grid,
    m_frak,
    m_frak_deriv,
    resolvent_many,
    weighted_resolvent,
    weighted_resolvent_deriv,
)
from rankone.rmt import ResolventInput, RunConfig, draw_spectral

finite = dict(allow_nan=False, allow_infinity=False)
upper = st.builds(complex, st.floats(-5, 5, **finite), st.floats(1e-3, 5, **finite))


@st.composite
def resolvent_inputs(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    mus = np.sort(np.array(draw(st.lists(st.floats(-3, 3, **finite), min_size=n, max_size=n, unique=True))))
    w = np.array(draw(st.lists(st.floats(0.01, 1, **finite), min_size=n, max_size=n)))
    return ResolventInput(mus, w / w.sum())


def test_single_term():
    rin = ResolventInput(np.array([0.3]), np.array([1.0]))
    z = 0.3 + 1j
    assert weighted_resolvent(rin, z) == pytest.approx(1 / (0.3 - z))
    assert weighted_resolvent_deriv(rin, z) == pytest.approx(-1)


def test_toy2_values(toy2):
    assert weighted_resolvent(toy2, 1j) == pytest.approx(0.5j, abs=1e-15)
    assert abs(weighted_resolvent_deriv(toy2, 1j)) < 1e-15


def test_pole_error(toy2):
    with pytest.raises(PoleProximityError):
        weighted_resolvent(toy2, 1.0)


@given(resolvent_inputs(), upper)
def test_conjugate_symmetry(rin, z):
    assume(np.min(np.abs(rin.mus - z)) > 1e-6)
    assert weighted_resolvent(rin, np.conj(z)) == pytest.approx(np.conj(weighted_resolvent(rin, z)), rel=1e-12)


@given(resolvent_inputs(), upper)
def test_herglotz(rin, z):
    # Im W > 0 in the upper half plane
    assert weighted_resolvent(rin, z).imag > 0


@given(resolvent_inputs(), upper)
def test_derivative_matches_central_difference(rin, z):
    assume(np.min(np.abs(rin.mus - z)) > 0.05)
    h = 1e-6
    fd = (weighted_resolvent(rin, z + h) - weighted_resolvent(rin, z - h)) / (2 * h)
    assert abs(weighted_resolvent_deriv(rin, z) - fd) <= 1e-6 * max(1, abs(fd))


def test_resolvent_many_agrees(toy2):
    zs = np.array([1j, 0.5 + 0.1j, -2 + 3j])
    W, dW = resolvent_many(toy2.mus, toy2.weights, zs)
    assert np.allclose(W, [weighted_resolvent(toy2, z) for z in zs], rtol=1e-14)
    assert np.allclose(dW, [weighted_resolvent_deriv(toy2, z) for z in zs], rtol=1e-14)


def test_m_frak_examples():
    assert m_frak(1.5j) == pytest.approx(0.5j, abs=1e-15)
    assert m_frak(2j) == pytest.approx((np.sqrt(2) - 1) * 1j, abs=1e-15)
    assert m_frak(1j) == pytest.approx((np.sqrt(5) - 1) / 2 * 1j, abs=1e-15)


@pytest.mark.parametrize("t", [1.01, 1.5, 2, 10])
def test_m_frak_at_i_tstar(t):
    assert abs(m_frak(1j * t_star(t)) - 1j / t) <= 1e-13


@pytest.mark.parametrize("z", [2.0, -2.0, 3.5, -10.0])
def test_m_frak_rays(z):
    with pytest.raises(DomainError):
        m_frak(z)


@given(st.builds(complex, st.floats(-50, 50, **finite), st.floats(-50, 50, **finite)))
def test_m_frak_quadratic(z):
    assume(not (z.imag == 0 and abs(z.real) >= 2))
    m = m_frak(z)
    assert abs(m * m + z * m + 1) <= 1e-13 * max(1, abs(z) * abs(m))


@given(st.floats(-1.99, 1.99, **finite))
def test_m_frak_continuous_across_cut(E):
    # analytic continuation through (-2, 2): the two sides agree once the
    # first-order term 2i d m'(E) is removed
    d = 1e-8
    jump = m_frak(E + 1j * d) - m_frak(E - 1j * d) - 2j * d * m_frak_deriv(complex(E))
    assert abs(jump) <= 1e-10


@given(upper)
def test_m_frak_deriv(z):
    h = 1e-6
    fd = (m_frak(z + h) - m_frak(z - h)) / (2 * h)
    assume(abs(z * z - 4) > 0.1)
    assert abs(m_frak_deriv(z) - fd) < 1e-5 * max(1, abs(fd))


@given(st.floats(0.5, 20, **finite))
def test_m_inversion(t):
    # m(z) = i/t exactly at z = i t*, for t on either side of 1
    assert abs(m_frak(1j * t_star(t)) - 1j / t) < 1e-12


def test_local_law_toy2(toy2):
    rep = local_law_error(toy2, [1j], 2)
    assert rep.raw_error[0] == pytest.approx(0.11803398874989479, abs=1e-14)
    assert rep.sup_normalized == pytest.approx(0.2807337184670521, abs=1e-12)


def test_local_law_far_away():
    rin = ResolventInput(np.array([0.4]), np.array([1.0]))
    rep = local_law_error(rin, [100j, 1 + 100j], 4)
    assert np.all(rep.raw_error <= 2 / 100)


def test_local_law_rejects_outside_grid(toy2):
    with pytest.raises(DomainError, match="grid point 1"):
        local_law_error(toy2, [1j, 4 + 1j], 2)
    with pytest.raises(ValueError):
        local_law_error(toy2, [], 2)


def test_local_law_gue_report(tmp_path):
    n = 300
    d = draw_spectral(RunConfig(n, seed=5))
    grid = local_law_grid(n)
    rep = local_law_error(d.rin, grid, n)
    assert grid.size == 50
    assert rep.sup_normalized == rep.normalized_error.max()
    rep.write_csv(tmp_path / "ll.csv")
    head = (tmp_path / "ll.csv").read_text().splitlines()
    assert head[0] == "re,im,raw_error,normalized_error"
    assert len(head) == 51


def test_local_law_grid_shape():
    g = local_law_grid(1000, n_eta=3, n_E=4)
    assert g.size == 12
    assert g.imag.min() == pytest.approx(1000 ** -0.9)
    with pytest.raises(ValueError):
        local_law_grid(10, n_eta=0)
