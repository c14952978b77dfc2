import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifree.errors import DomainError, InputError
from bifree.measure import Measure1D, Measure2D, dirac
from bifree.transform2d import (
    GEvaluator2D,
    g1,
    g1_prime,
    g2,
    g_arcsine,
    g_free_poisson,
    g_semicircle,
    invert1d,
    invert2d,
    marginal_g_limit,
    semicircle_density,
    write_grid_csv,
)

from conftest import off_axis_points, prob_measures_2d


def test_g2_dirac():
    assert g2(dirac(0.0, 0.0), 1j, 1j) == pytest.approx(-1.0)
    assert g2(dirac(1.0, -2.0), 3.0 + 1j, 1j) == pytest.approx(1 / ((2 + 1j) * (2 + 1j)))


@given(prob_measures_2d(), off_axis_points())
def test_g2_conjugation_symmetry(mu, zw):
    z, w = zw
    assert g2(mu, np.conj(z), np.conj(w)) == pytest.approx(np.conj(g2(mu, z, w)), abs=1e-12)


@given(prob_measures_2d(), off_axis_points())
def test_g2_bounded_by_distance(mu, zw):
    z, w = zw
    assert abs(g2(mu, z, w)) <= 1 / (abs(z.imag) * abs(w.imag)) + 1e-12


def test_real_argument_rejected():
    with pytest.raises(DomainError):
        g2(dirac(0.0, 0.0), 1.0, 1j)


def test_g1_prime_matches_difference():
    sigma = Measure1D([-1.0, 0.5, 2.0], [0.2, 0.5, 0.3])
    z, h = 0.3 - 0.7j, 1e-6
    fd = (g1(sigma, z + h) - g1(sigma, z - h)) / (2 * h)
    assert g1_prime(sigma, z) == pytest.approx(fd, rel=1e-8)


@pytest.mark.parametrize("M", [1e2, 1e3, 1e4])
def test_marginal_g_limit_is_first_order(M):
    mu = Measure2D([0.0, 1.0, -1.0], [1.0, 0.5, -2.0], [0.5, 0.25, 0.25])
    z = np.array([0.3 - 1j])
    err = abs(marginal_g_limit(mu, z, 1, M) - g1(mu.marginal(1), z))[0]
    # |λ G(z,λ) - G₁(z)| <= sup|t| / (M |Im z|)
    assert err <= 2.0 / M


def test_marginal_g_limit_order_estimate():
    mu = Measure2D([0.5, -0.5], [1.0, -1.0], [0.5, 0.5])
    z = np.array([0.2 - 0.5j])
    Ms = np.array([1e2, 1e3, 1e4])
    errs = [abs(marginal_g_limit(mu, z, 2, M) - g1(mu.marginal(2), z))[0] for M in Ms]
    slope = -np.polyfit(np.log(Ms), np.log(errs), 1)[0]
    assert slope >= 0.9


def test_invert2d_moments_are_order_y():
    mu = Measure2D([-0.5, 0.5], [0.0, 0.5], [0.4, 0.6])
    for y in (0.08, 0.04):
        grid = invert2d(mu, (-8, 8), (-8, 8), 801, 801, y)
        # first moments of the Poisson-smoothed law are finite only by truncation;
        # the mass lost to the Cauchy tails outside the window is O(y)
        assert 1 - grid.riemann_mass() <= 2.0 * y
        assert grid.moment(1, 0) == pytest.approx(mu.moment(1, 0), abs=5 * y)


def test_invert2d_validates():
    with pytest.raises(InputError):
        invert2d(dirac(0, 0), (-1, 1), (-1, 1), 5, 5, 0.0)
    with pytest.raises(InputError):
        invert2d(dirac(0, 0), (-1, 1), (-1, 1), 1, 5, 0.1)


def test_invert2d_signed_not_clamped():
    from bifree.measure import SignedMeasure2D

    mu = SignedMeasure2D([0.0], [0.0], [-1.0])
    grid = invert2d(mu, (-1, 1), (-1, 1), 11, 11, 0.1)
    assert grid.values.min() < 0


def test_invert2d_thread_count_does_not_change_result(monkeypatch):
    mu = Measure2D([0.3, -0.2], [0.1, 0.4], [0.5, 0.5])
    monkeypatch.setenv("BIFREE_THREADS", "1")
    a = invert2d(mu, (-1, 1), (-1, 1), 31, 29, 0.1).values
    monkeypatch.setenv("BIFREE_THREADS", "4")
    b = invert2d(mu, (-1, 1), (-1, 1), 31, 29, 0.1).values
    assert np.array_equal(a, b)


def test_semicircle_inversion_converges():
    x = np.linspace(-1.5, 1.5, 31)
    for y, tol in ((1e-3, 5e-3), (1e-6, 1e-5)):
        assert np.abs(invert1d(g_semicircle, x, y) - semicircle_density(x)).max() <= tol


def _theta_quad(weight, x_of, z, n=20_000):
    # x = x_of(θ) on [0, π] removes the square-root endpoint behaviour
    th = (np.arange(n) + 0.5) * np.pi / n
    x = x_of(th)
    return np.sum(weight(th) / (z - x)) * np.pi / n


@pytest.mark.parametrize("z", [0.4 + 1j, -2.5 - 0.3j, 3 + 0.5j])
def test_closed_forms_against_quadrature(z):
    sc = _theta_quad(lambda th: 2 * np.sin(th) ** 2 / np.pi, lambda th: 2 * np.cos(th), z)
    assert g_semicircle(z) == pytest.approx(sc, abs=1e-10)
    arc = _theta_quad(lambda th: np.full_like(th, 1 / np.pi), lambda th: 2 * np.cos(th), z)
    assert g_arcsine(z) == pytest.approx(arc, abs=1e-10)
    # free Poisson rate 1 on [0, 4] with x = 2 - 2cos θ
    mp = _theta_quad(lambda th: 2 * np.sin(th) ** 2 / (np.pi * (2 - 2 * np.cos(th))),
                     lambda th: 2 - 2 * np.cos(th), z)
    assert g_free_poisson(z) == pytest.approx(mp, abs=1e-10)


@given(st.floats(0.1, 4.0), st.floats(-1, 1))
def test_semicircle_g_is_inverse_of_k(var, mean):
    z = 0.7 - 1.3j
    G = g_semicircle(z, var, mean)
    # K(G) = 1/G + mean + var G
    assert 1 / G + mean + var * G == pytest.approx(z, abs=1e-10)


def test_grid_csv_format():
    grid = invert2d(dirac(0, 0), (-1, 1), (0, 1), 3, 2, 0.5)
    lines = write_grid_csv(grid).splitlines()
    assert lines[0] == "x,u,density"
    assert len(lines) == 7
    assert lines[1].startswith("-1,0,")


def test_evaluator_marginal_falls_back_to_limit():
    mu = Measure2D([0.5], [1.0], [1.0])
    ev = GEvaluator2D(lambda z, w: g2(mu, z, w))
    assert ev.marginal(1)(np.array([1j]))[0] == pytest.approx(1 / (1j - 0.5), abs=1e-6)
