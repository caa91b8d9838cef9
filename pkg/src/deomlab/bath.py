"""Drude baths: spectral density, correlation functions and exponential series.

The bath correlation function follows the fluctuation-dissipation theorem::

    C(t) = (1/pi) int dw exp(-i w t) J(w) / (1 - exp(-beta w))
         = sum_k xi_k exp(-rate_k t)

Energies/rates in cm^-1, ``beta`` in cm, times in (cm^-1)^-1.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DrudeSpectralDensity:
    """``J(w) = 2 eta lam gam w / (w**2 + gam**2)``."""

    eta: float = 1.0
    lam: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"reorganization energy must be >= 0, got {self.lam}")
        if self.gamma <= 0:
            raise ValueError(f"cutoff gamma must be > 0, got {self.gamma}")

    @property
    def strength(self):
        return self.eta * self.lam

    def __call__(self, w):
        return spectral_density_value(self, w)

    def slope(self):
        """``dJ/dw`` at the origin."""
        return 2.0 * self.strength / self.gamma

    def scaled(self, factor):
        return DrudeSpectralDensity(self.eta * factor, self.lam, self.gamma)


def spectral_density_value(j, w):
    w = np.asarray(w, dtype=float)
    out = 2.0 * j.strength * j.gamma * w / (w**2 + j.gamma**2)
    return out if out.ndim else float(out)


def bose(w, beta):
    """``1/(exp(beta w) - 1)``; diverges at ``w = 0``."""
    return 1.0 / np.expm1(beta * np.asarray(w, dtype=float))


def half_fourier_rate(j, w, beta):
    """``C(w) = J(w) [1 + n(w)]`` with the finite ``w -> 0`` limit ``J'(0)/beta``.

    Negative frequencies give ``J(|w|) n(|w|)`` (detailed balance).
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    small = np.abs(beta * w) < 1e-8
    ws = w[~small]
    out[~small] = spectral_density_value(j, ws) / (-np.expm1(-beta * ws))
    # J(w)/(1 - e^{-beta w}) ~ J'(0)/beta (1 + beta w/2)
    out[small] = j.slope() / beta * (1.0 + 0.5 * beta * w[small])
    return out if out.size > 1 else float(out[0])


# -- exponential series -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExponentialSeries:
    """``C(t) = sum_k xi[k] exp(-rates[k] t)`` with its conjugate pairing.

    ``partner[k]`` is the index ``kbar`` with ``rates[kbar] == conj(rates[k])``.
    """

    xi: np.ndarray
    rates: np.ndarray
    partner: np.ndarray = field(default=None)

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=complex))
        rates = np.atleast_1d(np.asarray(self.rates, dtype=complex))
        if xi.shape != rates.shape:
            raise ValueError("xi and rates must have the same length")
        if np.any(rates.real <= 0):
            raise ValueError("all rates need a strictly positive real part")
        partner = self.partner
        if partner is None:
            partner = conjugate_pairing(rates)
        partner = np.asarray(partner, dtype=int)
        if partner.shape != xi.shape or np.any(partner[partner] != np.arange(len(xi))):
            raise ValueError("partner map must be an involution over all terms")
        if not np.allclose(rates[partner], np.conj(rates), rtol=1e-12, atol=1e-12):
            raise ValueError("partner map must pair each rate with its conjugate")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "partner", partner)

    def __len__(self):
        return len(self.xi)

    @classmethod
    def empty(cls):
        return cls(np.zeros(0, complex), np.zeros(0, complex), np.zeros(0, int))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-np.multiply.outer(t, self.rates)) @ self.xi
        return out

    def scaled(self, factor):
        return ExponentialSeries(factor * self.xi, self.rates, self.partner)

    def xi_bar_conj(self):
        """``conj(xi[partner[k]])`` for every term."""
        return np.conj(self.xi[self.partner])

    def lineshape(self, t):
        """``g(t) = int_0^t ds int_0^s du C(u)`` in closed form."""
        t = np.asarray(t, dtype=float)
        gt = np.multiply.outer(t, self.rates)
        terms = (np.expm1(-gt) + gt) / self.rates**2
        return terms @ self.xi


def conjugate_pairing(rates, tol=1e-10):
    rates = np.asarray(rates, dtype=complex)
    n = len(rates)
    partner = np.arange(n)
    scale = np.maximum(1.0, np.abs(rates))
    unmatched = [k for k in range(n) if abs(rates[k].imag) > tol * scale[k]]
    while unmatched:
        k = unmatched.pop(0)
        target = np.conj(rates[k])
        for j in unmatched:
            if abs(rates[j] - target) <= tol * scale[k]:
                partner[k], partner[j] = j, k
                unmatched.remove(j)
                break
        else:
            raise ValueError(f"rate {rates[k]} has no conjugate partner")
    return partner


def pade_poles(n_terms):
    """Poles and residues of the [N-1/N] Pade approximant of the Bose function.

    Returns ``(kappa, eps)`` such that::

        1/(1 - exp(-x)) ~ 1/x + 1/2 + sum_j 2 kappa_j x / (x**2 + eps_j**2)

    Poles come from the eigenvalues of two tridiagonal matrices.
    """
    if n_terms == 0:
        return np.zeros(0), np.zeros(0)
    n = n_terms
    b = np.array([1.0 / np.sqrt((2 * k + 3) * (2 * k + 5)) for k in range(2 * n - 1)])
    lam = np.linalg.eigvalsh(np.diag(b, 1) + np.diag(b, -1))
    eps = np.sort(2.0 / np.abs(lam[lam < 0]))[:n]
    if n > 1:
        bp = np.array([1.0 / np.sqrt((2 * k + 5) * (2 * k + 7)) for k in range(2 * n - 2)])
        lp = np.linalg.eigvalsh(np.diag(bp, 1) + np.diag(bp, -1))
        zeta = np.sort(2.0 / np.abs(lp[lp < 0]))[: n - 1]
    else:
        zeta = np.zeros(0)
    kappa = np.empty(n)
    prefactor = 0.5 * n * (2 * n + 3)
    for j in range(n):
        num = np.prod(zeta**2 - eps[j] ** 2)
        others = np.delete(eps, j)
        den = np.prod(others**2 - eps[j] ** 2)
        kappa[j] = prefactor * num / den
    return kappa, eps


def bose_pade(x, n_terms):
    """Evaluate the Pade approximant of ``1/(1 - exp(-x))``."""
    x = np.asarray(x, dtype=float)
    kappa, eps = pade_poles(n_terms)
    out = 1.0 / x + 0.5
    for k, e in zip(kappa, eps):
        out = out + 2 * k * x / (x**2 + e**2)
    return out


def decompose(j, beta, scheme="pade", n_terms=2):
    """Exponential series of the Drude correlation function.

    The first term is the Drude pole, ``xi = eta lam gam (cot(beta gam/2) - i)``
    with rate ``gam``.  ``n_terms`` further real terms come either from the
    Matsubara frequencies ``2 pi k / beta`` or from Pade poles of the Bose
    function.
    """
    if n_terms < 0:
        raise ValueError("n_terms must be >= 0")
    if j.strength == 0:
        return ExponentialSeries.empty()
    lam_gam = j.strength * j.gamma
    xi = [lam_gam * (1.0 / np.tan(0.5 * beta * j.gamma) - 1j)]
    rates = [complex(j.gamma)]
    if scheme == "matsubara":
        kappa = np.ones(n_terms)
        nu = 2.0 * np.pi * np.arange(1, n_terms + 1) / beta
    elif scheme == "pade":
        kappa, eps = pade_poles(n_terms)
        nu = eps / beta
    else:
        raise ValueError(f"unknown decomposition scheme {scheme!r}")
    if np.any(np.isclose(nu, j.gamma, rtol=1e-10)):
        raise ValueError("bath cutoff coincides with a Bose-function pole")
    xi = np.concatenate([xi, kappa * 4.0 * lam_gam * nu / (beta * (nu**2 - j.gamma**2))])
    rates = np.concatenate([rates, nu])
    return ExponentialSeries(np.array(xi), np.array(rates))


def classical_limit(series):
    """Keep only ``Re C(t)``, regrouped onto the existing rates."""
    xi = 0.5 * (series.xi + series.xi_bar_conj())
    return ExponentialSeries(xi, series.rates, series.partner)


# -- quadrature oracle --------------------------------------------------------


def _symmetric_part(j, beta):
    """``J(w) coth(beta w/2)`` with its finite ``w -> 0`` value ``2 J'(0)/beta``."""

    def f(w):
        if beta * w < 1e-8:
            return 2.0 * j.slope() / beta
        return spectral_density_value(j, w) / np.tanh(0.5 * beta * w)

    return f


def correlation_quadrature(j, beta, t, limit=400):
    """``C(t)`` by direct numerical integration of the FDT integral, ``t > 0``.

    Folding the integral onto ``w > 0``::

        Re C(t) =  (1/pi) int_0^inf J(w) coth(beta w/2) cos(w t) dw
        Im C(t) = -(1/pi) int_0^inf J(w) sin(w t) dw

    The oscillatory tails are handled with QUADPACK's Fourier-weight routine.
    At ``t = 0`` the real part of a Drude correlation function diverges
    logarithmically, so ``t`` must be positive.
    """
    if j.strength == 0:
        return 0j
    if t <= 0:
        raise ValueError("the Drude correlation function is singular at t = 0; need t > 0")
    sym = _symmetric_part(j, beta)
    anti = lambda w: spectral_density_value(j, w)
    # finite head + Fourier-weighted tail; the split keeps the low-w structure
    # (the cutoff and thermal scales) inside an ordinary adaptive rule
    split = 50.0 * max(j.gamma, 1.0 / beta)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            re_head, _ = integrate.quad(sym, 0.0, split, weight="cos", wvar=t, limit=limit)
            re_tail, _ = integrate.quad(sym, split, np.inf, weight="cos", wvar=t, limlst=200)
            im_head, _ = integrate.quad(anti, 0.0, split, weight="sin", wvar=t, limit=limit)
            im_tail, _ = integrate.quad(anti, split, np.inf, weight="sin", wvar=t, limlst=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"FDT quadrature failed at t={t:g}: {exc}") from exc
    return complex(re_head + re_tail, -(im_head + im_tail)) / np.pi


def sample_times(t_max, n_samples):
    """Uniform grid on ``(0, t_max]`` (the origin is excluded, see above)."""
    if t_max <= 0 or n_samples < 1:
        raise ValueError("need t_max > 0 and n_samples >= 1")
    return t_max * np.arange(1, n_samples + 1) / n_samples


def verify_decomposition(series, j, beta, t_max, n_samples, return_samples=False):
    """Max deviation of ``series`` from the quadrature oracle, relative to max |C|."""
    t = sample_times(t_max, n_samples)
    quad = np.array([correlation_quadrature(j, beta, ti) for ti in t])
    ser = series(t)
    scale = np.max(np.abs(quad))
    err = np.max(np.abs(ser - quad)) / scale if scale > 0 else float(np.max(np.abs(ser)))
    if return_samples:
        return float(err), t, ser, quad
    return float(err)
