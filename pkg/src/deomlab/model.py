"""Five-level reaction-center heat-engine model.

Site basis ordering is ``(a, b, c, d, e)``; the eigenbasis ordering is
``(a, +, -, d, e)`` where ``|+>`` is the upper eigenstate of the b/c block.
"""

from dataclasses import dataclass, field, fields, asdict
import math

import numpy as np

from . import units
from .bath import DrudeSpectralDensity
from .operators import EigenSystem, basis_projector, eigh

SITES = ("a", "b", "c", "d", "e")
EIGEN_LABELS = ("a", "+", "-", "d", "e")
A, B, C, D, E = range(5)
PHONON_MODES = (2, 3, 4, 5)
DIM = 5


class ConfigError(ValueError):
    """Invalid model or run parameter; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ModelConfig:
    """Flat, overridable model parameters.  Defaults are the reference parameter set."""

    E_a: float = 0.0
    E_b: float = 14856.0
    E_c: float = 14736.0
    E_d: float = 13245.0
    E_e: float = 1611.0
    V: float = 30.0
    Gamma: float = 100.0
    gamma_plus: float = 0.005
    gamma_minus: float = 0.005
    nbar_plus: float = 60000.0
    nbar_minus: float = 60000.0
    T: float = 300.0
    lambda_2: float = 140.0
    gamma_2: float = 140.0
    lambda_3: float = 200.0
    gamma_3: float = 200.0
    lambda_4: float = 100.0
    gamma_4: float = 10.0
    lambda_5: float = 100.0
    gamma_5: float = 10.0
    eta: float = 1.0
    # full 4x4 override of the correlation matrix over modes 2..5
    eta_matrix: list = field(default=None)

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in (mapping or {}).items():
            if key not in known:
                raise ConfigError(key, "unknown model parameter")
            if key == "eta_matrix":
                kwargs[key] = _parse_matrix(value)
                continue
            try:
                kwargs[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, f"expected a number, got {value!r}") from None
        return cls(**kwargs)

    def to_mapping(self):
        out = asdict(self)
        if out["eta_matrix"] is None:
            del out["eta_matrix"]
        return out


def _parse_matrix(value):
    if isinstance(value, str):
        rows = [r for r in value.replace(";", "\n").splitlines() if r.strip()]
        value = [[float(x) for x in r.replace(",", " ").split()] for r in rows]
    arr = np.asarray(value, dtype=float)
    if arr.shape != (4, 4):
        raise ConfigError("eta_matrix", f"expected a 4x4 matrix, got shape {arr.shape}")
    return arr.tolist()


@dataclass(frozen=True, eq=False)
class FiveLevelModel:
    site_energies: tuple
    coherent_coupling: float
    release_rate: float
    photon_rates: tuple
    photon_occupations: tuple
    temperature: float
    drude_params: dict
    eta_matrix: np.ndarray

    dim = DIM

    @property
    def beta(self):
        return units.beta(self.temperature)

    @property
    def kT(self):
        return units.kT(self.temperature)

    def spectral_density(self, mu, nu=None):
        """Drude ``J_{mu nu}`` for phonon modes ``mu, nu`` in 2..5."""
        nu = mu if nu is None else nu
        lam, gam = self.drude_params[nu]
        eta = float(self.eta_matrix[mu - 2, nu - 2])
        return DrudeSpectralDensity(eta=eta, lam=lam, gamma=gam)

    def replace(self, **changes):
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return FiveLevelModel(**kw)

    def hamiltonian(self):
        return system_hamiltonian(self)

    def rotation(self):
        return eigen_rotation(self)


def _check(cond, name, message):
    if not cond:
        raise ConfigError(name, message)


def build_model(config=None):
    """Validate a :class:`ModelConfig` (or mapping) and return the model."""
    if config is None:
        config = ModelConfig()
    elif not isinstance(config, ModelConfig):
        config = ModelConfig.from_mapping(config)
    c = config
    for name in ("E_a", "E_b", "E_c", "E_d", "E_e", "V"):
        _check(math.isfinite(getattr(c, name)), name, "must be finite")
    _check(c.Gamma >= 0, "Gamma", f"release rate must be >= 0, got {c.Gamma}")
    _check(c.T > 0, "T", f"temperature must be > 0, got {c.T}")
    for name in ("gamma_plus", "gamma_minus"):
        _check(getattr(c, name) >= 0, name, "photon rate must be >= 0")
    for name in ("nbar_plus", "nbar_minus"):
        _check(getattr(c, name) >= 0, name, "photon occupation must be >= 0")
    drude = {}
    for mode in PHONON_MODES:
        lam, gam = getattr(c, f"lambda_{mode}"), getattr(c, f"gamma_{mode}")
        _check(lam >= 0, f"lambda_{mode}", f"reorganization energy must be >= 0, got {lam}")
        _check(gam > 0, f"gamma_{mode}", f"cutoff must be > 0, got {gam}")
        drude[mode] = (float(lam), float(gam))

    if c.eta_matrix is not None:
        eta = np.array(c.eta_matrix, dtype=float)
    else:
        _check(abs(c.eta) <= 1, "eta", f"|eta| must not exceed 1, got {c.eta}")
        eta = np.eye(4)
        eta[2, 3] = eta[3, 2] = c.eta
    _validate_eta(eta, drude)

    return FiveLevelModel(
        site_energies=(c.E_a, c.E_b, c.E_c, c.E_d, c.E_e),
        coherent_coupling=float(c.V),
        release_rate=float(c.Gamma),
        photon_rates=(float(c.gamma_plus), float(c.gamma_minus)),
        photon_occupations=(float(c.nbar_plus), float(c.nbar_minus)),
        temperature=float(c.T),
        drude_params=drude,
        eta_matrix=eta,
    )


def _validate_eta(eta, drude):
    _check(eta.shape == (4, 4), "eta_matrix", "must be 4x4")
    _check(np.allclose(eta, eta.T, atol=1e-14), "eta_matrix", "must be symmetric")
    _check(np.allclose(np.diag(eta), 1.0), "eta_matrix", "diagonal entries must equal 1")
    _check(np.all(np.abs(eta) <= 1.0), "eta", "off-diagonal entries must lie in [-1, 1]")
    for i in range(4):
        for j in range(i + 1, 4):
            if eta[i, j] != 0:
                mi, mj = PHONON_MODES[i], PHONON_MODES[j]
                _check(
                    drude[mi] == drude[mj],
                    "eta_matrix",
                    f"correlated modes {mi} and {mj} need identical (lambda, gamma)",
                )
    # a valid Gaussian bath needs a positive semidefinite J_{mu nu}
    _check(np.linalg.eigvalsh(eta).min() >= -1e-12, "eta_matrix", "must be positive semidefinite")


def system_hamiltonian(m):
    h = np.diag(np.asarray(m.site_energies, dtype=complex))
    h[B, C] = h[C, B] = m.coherent_coupling
    return h


def photon_coupling():
    q = basis_projector(DIM, A, B)
    return q + q.T


def phonon_coupling(mode):
    pairs = {2: (C, D), 3: (E, A), 4: (B, B), 5: (C, C)}
    if mode not in pairs:
        raise ValueError(f"phonon mode must be one of {PHONON_MODES}, got {mode}")
    i, j = pairs[mode]
    if i == j:
        return basis_projector(DIM, i)
    q = basis_projector(DIM, i, j)
    return q + q.T


@dataclass(frozen=True, eq=False)
class EigenRotation:
    """Diagonalisation of the b/c block embedded in the five-level space.

    ``mixing`` holds the eigenvectors ``(|+>, |->)`` as columns in the
    ``(|b>, |c>)`` basis.  ``basis`` is the 5x5 change of basis whose columns
    are ``(|a>, |+>, |->, |d>, |e>)`` written in the site basis.
    """

    block: EigenSystem
    mixing: np.ndarray
    energies: np.ndarray
    basis: np.ndarray

    @property
    def splitting(self):
        return float(self.energies[1] - self.energies[2])

    @property
    def omega_plus_a(self):
        return float(self.energies[1] - self.energies[0])

    @property
    def omega_minus_a(self):
        return float(self.energies[2] - self.energies[0])

    def to_eigen(self, op):
        return self.basis.T @ op @ self.basis

    def to_site(self, op):
        return self.basis @ op @ self.basis.T

    def eigensystem(self):
        """Full eigensystem in the (a, +, -, d, e) ordering (not sorted)."""
        return EigenSystem(energies=self.energies, vectors=self.basis)


def eigen_rotation(m):
    e = m.site_energies
    block = np.array([[e[B], m.coherent_coupling], [m.coherent_coupling, e[C]]])
    if m.coherent_coupling == 0:
        # degenerate limit: no mixing, |+> = |b>, |-> = |c>
        es = EigenSystem(energies=np.sort([e[B], e[C]]), vectors=np.eye(2))
        mixing = np.eye(2)
        eps_plus, eps_minus = e[B], e[C]
    else:
        es = eigh(block)
        mixing = es.vectors[:, ::-1].copy()
        eps_plus, eps_minus = es.energies[1], es.energies[0]
    basis = np.eye(DIM)
    basis[np.ix_([B, C], [1, 2])] = mixing
    energies = np.array([e[A], eps_plus, eps_minus, e[D], e[E]], dtype=float)
    return EigenRotation(block=es, mixing=mixing, energies=energies, basis=basis)


@dataclass(frozen=True, eq=False)
class CouplingSet:
    photon_coupling: np.ndarray
    phonon_couplings: dict
    eigen_rotation: EigenRotation

    def rotated(self, which):
        """Coupling ``which`` (1 for photon, 2..5 for phonon) in the eigenbasis."""
        op = self.photon_coupling if which == 1 else self.phonon_couplings[which]
        return self.eigen_rotation.to_eigen(op)


def couplings(m):
    return CouplingSet(
        photon_coupling=photon_coupling(),
        phonon_couplings={mode: phonon_coupling(mode) for mode in PHONON_MODES},
        eigen_rotation=eigen_rotation(m),
    )
