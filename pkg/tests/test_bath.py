import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import bernoulli

from deomlab import units
from deomlab.bath import (
    DrudeSpectralDensity,
    ExponentialSeries,
    bose,
    bose_pade,
    classical_limit,
    conjugate_pairing,
    correlation_quadrature,
    decompose,
    half_fourier_rate,
    pade_poles,
    sample_times,
    verify_decomposition,
)
from deomlab.model import build_model

BETA = units.beta(300.0)


def test_spectral_density_shape():
    j = DrudeSpectralDensity(1.0, 140.0, 140.0)
    # maximum lam at w = gamma, odd in w
    assert j(140.0) == pytest.approx(140.0)
    assert j(-50.0) == pytest.approx(-j(50.0))
    assert j.slope() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        DrudeSpectralDensity(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        DrudeSpectralDensity(1.0, 1.0, 0.0)


def test_drude_pole_coefficient():
    # residue of J/(1 - e^{-beta w}) at w = -i gamma, worked by hand
    j = DrudeSpectralDensity(1.0, 100.0, 10.0)
    s = decompose(j, BETA, "matsubara", 0)
    expected = 100.0 * 10.0 * (1.0 / math.tan(BETA * 10.0 / 2) - 1j)
    assert s.xi[0] == pytest.approx(expected, rel=1e-12)
    assert s.rates[0] == 10.0


def test_matsubara_frequencies():
    s = decompose(DrudeSpectralDensity(1.0, 140.0, 140.0), BETA, "matsubara", 3)
    nu1 = 2 * math.pi * units.kT(300.0)
    assert s.rates[1].real == pytest.approx(nu1)
    assert s.rates[1].real == pytest.approx(1310.1, abs=0.1)
    assert np.allclose(s.rates[1:].real, nu1 * np.arange(1, 4))
    assert np.all(s.xi[1:].imag == 0)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_pade_matches_bose_taylor_series(n):
    # sum_j 2 kappa_j / (z + eps_j^2), z = x^2, must reproduce the first 2N
    # Taylor coefficients of (1/(1-e^-x) - 1/x - 1/2)/x = sum_k B_2k x^(2k-2)/(2k)!
    kappa, eps = pade_poles(n)
    b = bernoulli(4 * n)
    for k in range(2 * n):
        exact = b[2 * k + 2] / math.factorial(2 * k + 2)
        approx = np.sum(2 * kappa * (-1) ** k / eps ** (2 * k + 2))
        assert approx == pytest.approx(exact, rel=1e-8, abs=1e-14)


def test_pade_accuracy_improves_with_order():
    x = np.linspace(0.1, 10.0, 200)
    exact = 1.0 / (-np.expm1(-x))
    errs = [np.max(np.abs(bose_pade(x, n) - exact)) for n in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert np.all(np.isfinite(bose_pade(x, 0)))


def test_pade_poles_real_and_positive():
    kappa, eps = pade_poles(4)
    assert np.all(kappa > 0)
    assert np.all(np.diff(eps) > 0)
    assert eps[0] > 2 * math.pi  # first Pade pole sits beyond the first Matsubara pole


def test_quadrature_oracle_against_long_matsubara_sum():
    j = DrudeSpectralDensity(1.0, 200.0, 200.0)
    ref = decompose(j, BETA, "matsubara", 20000)
    for t_fs in (10.0, 80.0, 400.0):
        t = units.fs_to_internal(t_fs)
        assert correlation_quadrature(j, BETA, t) == pytest.approx(ref(t), rel=1e-7)


def test_quadrature_rejects_origin():
    with pytest.raises(ValueError, match="singular"):
        correlation_quadrature(DrudeSpectralDensity(1.0, 1.0, 1.0), BETA, 0.0)


def test_imaginary_part_is_temperature_independent():
    j = DrudeSpectralDensity(1.0, 100.0, 10.0)
    t = units.fs_to_internal(50.0)
    # Im C(t) = -lam gam e^{-gam t}
    for beta in (BETA, 10 * BETA):
        assert correlation_quadrature(j, beta, t).imag == pytest.approx(-1000.0 * math.exp(-10.0 * t), rel=1e-8)


@pytest.mark.parametrize("mode", [2, 3, 4])
def test_pade_two_terms_against_quadrature(mode):
    m = build_model()
    j = m.spectral_density(mode)
    s = decompose(j, m.beta, "pade", 2)
    assert verify_decomposition(s, j, m.beta, units.fs_to_internal(500.0), 50) < 1e-3


def test_classical_limit_keeps_real_part():
    s = decompose(DrudeSpectralDensity(1.0, 100.0, 10.0), BETA, "pade", 2)
    c = classical_limit(s)
    t = np.linspace(0.0, 0.1, 25)
    assert np.allclose(c(t).real, s(t).real, rtol=1e-13)
    assert np.max(np.abs(c(t).imag)) <= 1e-12 * np.max(np.abs(s(t)))


def test_conjugate_pairing_on_complex_rates():
    rates = np.array([1.0, 2 + 3j, 5.0, 2 - 3j])
    assert list(conjugate_pairing(rates)) == [0, 3, 2, 1]
    with pytest.raises(ValueError):
        conjugate_pairing(np.array([1 + 1j]))
    with pytest.raises(ValueError):
        ExponentialSeries([1.0], [-1.0])


def test_lineshape_closed_form_against_quadrature():
    s = decompose(DrudeSpectralDensity(1.0, 100.0, 10.0), BETA, "pade", 2)
    t = 0.02
    inner = lambda u: integrate.quad(lambda v: s(v).real, 0, u)[0]
    re_g = integrate.quad(inner, 0, t)[0]
    assert s.lineshape(t).real == pytest.approx(re_g, rel=1e-8)


def test_half_fourier_rate_limits_and_balance():
    j = DrudeSpectralDensity(1.0, 100.0, 10.0)
    assert half_fourier_rate(j, 0.0, BETA) == pytest.approx(2 * 100.0 / (BETA * 10.0))
    w = 134.16
    up, down = half_fourier_rate(j, w, BETA), half_fourier_rate(j, -w, BETA)
    assert down / up == pytest.approx(math.exp(-BETA * w), rel=1e-12)
    assert up == pytest.approx(j(w) * (1 + bose(w, BETA)), rel=1e-12)
    # continuity through the small-w branch
    assert half_fourier_rate(j, 1e-7, BETA) == pytest.approx(half_fourier_rate(j, 1e-3, BETA), rel=1e-5)


def test_zero_strength_gives_empty_series():
    s = decompose(DrudeSpectralDensity(1.0, 0.0, 10.0), BETA)
    assert len(s) == 0
    assert s(np.array([0.1])) == pytest.approx(0.0)


def test_sample_times_exclude_origin():
    t = sample_times(1.0, 4)
    assert np.allclose(t, [0.25, 0.5, 0.75, 1.0])


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 500.0), st.floats(1.0, 500.0), st.integers(0, 4))
def test_series_conjugate_symmetry(lam, gam, n):
    # C(-t) = C(t)^*  implies  sum_k conj(xi_kbar) e^{-gamma_k t} = C(t)^* on t > 0 too
    s = decompose(DrudeSpectralDensity(1.0, lam, gam), BETA, "pade", n)
    t = np.linspace(0.0, 0.05, 7)
    c_conj = np.exp(-np.multiply.outer(t, s.rates)) @ s.xi_bar_conj()
    assert np.allclose(c_conj, np.conj(s(t)), rtol=1e-12, atol=1e-9)
    assert np.all(s.rates.real > 0)
