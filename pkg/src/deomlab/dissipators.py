"""Markovian generators: electron release, photon bath and secular Lindblad."""

from dataclasses import dataclass

import numpy as np

from .bath import half_fourier_rate
from .model import A, D, E, DIM, PHONON_MODES, couplings, eigen_rotation
from .operators import (
    Dissipator,
    EigenSystem,
    as_operator,
    basis_projector,
    dag,
    eigh,
    lindblad_dissipator,
    spost,
    spre,
    sprepost,
)

FREQ_TOL = 1e-6


def release_superop(gamma, source=D, target=E, dim=DIM):
    """``L(O) = -(G/2)[O P + P O - 2 |t><s| O |s><t|]`` with ``P = |s><s|``."""
    if gamma < 0:
        raise ValueError(f"release rate must be >= 0, got {gamma}")
    for idx in (source, target):
        if not 0 <= idx < dim:
            raise IndexError(f"state index {idx} outside 0..{dim - 1}")
    if source == target:
        raise ValueError("source and target states must differ")
    jump = basis_projector(dim, target, source)
    return Dissipator(lindblad_dissipator(jump, gamma))


def photon_superop(m, cs=None, basis="site"):
    """Photon-bath Lindblad term acting on the ``a <-> +/-`` transitions.

    Each optical channel has an emission part ``|+/-> -> |a>`` weighted by
    ``1 + nbar`` and an absorption part weighted by ``nbar``; the channel rate
    is ``gamma_{+/-}`` times the squared photon-coupling matrix element.
    """
    cs = cs or couplings(m)
    rot = cs.eigen_rotation
    q1 = cs.rotated(1)
    if basis == "site":
        vecs = rot.basis
    elif basis == "eigen":
        vecs = np.eye(DIM)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    ket_a = vecs[:, A]
    out = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for slot, rate, nbar in zip((1, 2), m.photon_rates, m.photon_occupations):
        weight = rate * abs(q1[A, slot]) ** 2
        if weight == 0:
            continue
        down = np.outer(ket_a, vecs[:, slot])
        out += weight * (1.0 + nbar) * lindblad_dissipator(down)
        out += weight * nbar * lindblad_dissipator(dag(down))
    return Dissipator(out)


@dataclass(frozen=True, eq=False)
class EigenCoupling:
    """Coupling operators split into single-transition pieces.

    ``jump_ops[(mu, m, n)] = Q_{mu; mn} |m><n|`` in the eigenbasis and
    ``frequencies[m, n] = e_m - e_n``.
    """

    jump_ops: dict
    frequencies: np.ndarray
    eigensystem: EigenSystem

    def operator(self, mu):
        """Reassemble ``Q_mu`` in the eigenbasis."""
        dim = self.frequencies.shape[0]
        out = np.zeros((dim, dim), dtype=complex)
        for (nu, _, _), s in self.jump_ops.items():
            if nu == mu:
                out += s
        return out


def _eigensystem(h):
    h = as_operator(h)
    off = h - np.diag(np.diag(h))
    if not np.any(off):
        # already diagonal: keep the ordering so no rotation round-off enters
        return EigenSystem(energies=np.real(np.diag(h)).copy(), vectors=np.eye(h.shape[0]))
    return eigh(h)


def eigen_coupling(h, ops):
    es = _eigensystem(h)
    omega = es.transition_frequencies()
    dim = es.dim
    jumps = {}
    for mu, q in enumerate(ops):
        qe = es.to_eigenbasis(as_operator(q))
        for m in range(dim):
            for n in range(dim):
                if qe[m, n] != 0:
                    jumps[(mu, m, n)] = qe[m, n] * basis_projector(dim, m, n)
    return EigenCoupling(jump_ops=jumps, frequencies=omega, eigensystem=es)


def _frequency_groups(omega, tol):
    """Group ordered pairs ``(m, n)`` by transition frequency."""
    pairs = sorted(np.ndindex(omega.shape), key=lambda p: omega[p])
    groups = []
    for p in pairs:
        if groups and abs(omega[p] - groups[-1][0]) <= tol:
            groups[-1][1].append(p)
        else:
            groups.append([omega[p], [p]])
    return [(float(np.mean([omega[p] for p in ps])), ps) for _, ps in groups]


def thermal_rate(spectral, beta):
    """Rate table ``C_{mu nu}(w) = J_{mu nu}(w) [1 + n(w)]`` from Drude densities.

    ``spectral`` maps ``(mu, nu)`` to a :class:`DrudeSpectralDensity`; missing
    pairs are uncorrelated.
    """

    def rate(mu, nu, w):
        j = spectral.get((mu, nu))
        if j is None or j.strength == 0:
            return 0.0
        return half_fourier_rate(j, w, beta)

    return rate


def secular_lindblad(h, couplings, beta=None, cross=None, rate=None, freq_tol=FREQ_TOL):
    """Secular (Davies) Lindblad generator of a thermal bath.

    Parameters
    ----------
    h : array
        System Hamiltonian.  The generator is returned in the same basis.
    couplings : sequence of (Q, J)
        System coupling operators and their Drude spectral densities.
    beta : float
        Inverse temperature in cm.
    cross : dict, optional
        Cross spectral densities ``{(mu, nu): J}`` between couplings.
    rate : callable, optional
        ``rate(mu, nu, w)`` replacing the thermal ``C_{mu nu}(w)``.
    freq_tol : float
        Transitions whose frequencies agree within this tolerance are grouped
        and keep their mutual cross terms.

    Notes
    -----
    Jump operators ``A_mu(w)`` collect all eigenbasis transitions at frequency
    ``w``.  The generator is::

        sum_w sum_{mu nu} 2 C_{mu nu}(w) [A_nu rho A_mu^+ - {A_mu^+ A_nu, rho}/2]

    which equals the double sum over ordered transition pairs with its
    ``J (1 + n)`` emission and ``J n`` absorption halves.
    """
    ops = [as_operator(q) for q, _ in couplings]
    if rate is None:
        if beta is None:
            raise ValueError("beta is required for thermal rates")
        spectral = {(i, i): j for i, (_, j) in enumerate(couplings)}
        spectral.update(cross or {})
        rate = thermal_rate(spectral, beta)
    ec = eigen_coupling(h, ops)
    es = ec.eigensystem
    dim = es.dim
    qe = [es.to_eigenbasis(q) for q in ops]
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for w, pairs in _frequency_groups(ec.frequencies, freq_tol):
        # A_mu(w) = sum over (m, n) with e_m - e_n = w of Q_{mu; nm} |n><m|
        jumps = []
        for q in qe:
            a = np.zeros((dim, dim), dtype=complex)
            for m, n in pairs:
                a[n, m] = q[n, m]
            jumps.append(a)
        for mu, a_mu in enumerate(jumps):
            if not np.any(a_mu):
                continue
            for nu, a_nu in enumerate(jumps):
                if not np.any(a_nu):
                    continue
                c = rate(mu, nu, w)
                if c == 0:
                    continue
                prod = dag(a_mu) @ a_nu
                out += 2.0 * c * (sprepost(a_nu, dag(a_mu)) - 0.5 * (spre(prod) + spost(prod)))
    gen = Dissipator(out)
    if not np.array_equal(es.vectors, np.eye(dim)):
        gen = gen.transform(dag(es.vectors))
    return gen


def phonon_secular_lindblad(m, basis="site"):
    """Secular Lindblad treatment of the four phonon couplings, cross terms included."""
    cs = couplings(m)
    rot = cs.eigen_rotation
    if basis == "site":
        h = m.hamiltonian()
        ops = [cs.phonon_couplings[mode] for mode in PHONON_MODES]
    elif basis == "eigen":
        h = np.diag(rot.energies).astype(complex)
        ops = [cs.rotated(mode) for mode in PHONON_MODES]
    else:
        raise ValueError(f"unknown basis {basis!r}")
    spectral = {}
    for i, mu in enumerate(PHONON_MODES):
        for k, nu in enumerate(PHONON_MODES):
            j = m.spectral_density(mu, nu)
            if j.strength != 0:
                spectral[(i, k)] = j
    pairs = [(q, spectral.get((i, i))) for i, q in enumerate(ops)]
    return secular_lindblad(h, pairs, rate=thermal_rate(spectral, m.beta))


def hamiltonian_in(m, basis):
    if basis == "site":
        return m.hamiltonian()
    if basis == "eigen":
        return np.diag(eigen_rotation(m).energies).astype(complex)
    raise ValueError(f"unknown basis {basis!r}")


def total_markovian_generator(m, include_phonon_lindblad=False, basis="eigen"):
    """``-i[H_S, .] + L_release + L_photon`` (+ secular phonon Lindblad)."""
    gen = Dissipator.hamiltonian(hamiltonian_in(m, basis))
    gen = gen + release_superop(m.release_rate, D, E)
    gen = gen + photon_superop(m, basis=basis)
    if include_phonon_lindblad:
        gen = gen + phonon_secular_lindblad(m, basis=basis)
    return gen
