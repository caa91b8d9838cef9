"""Dissipaton equation-of-motion hierarchy.

ADOs are indexed by occupation vectors over the dissipaton modes.  The
generator acting on ``rho_n`` is::

    d/dt rho_n = (M - sum_k n_k g_k) rho_n
                 - i sum_k [Q_mu(k), rho_{n+k}]
                 - i sum_k n_k (xi_k Q_nu(k) rho_{n-k} - conj(xi_kbar) rho_{n-k} Q_nu(k))

with ``M`` the Markovian part (system commutator, release, photon bath).
Neighbours above the depth limit are dropped.
"""

from dataclasses import dataclass, field
from math import comb
import warnings

import numpy as np
from scipy import integrate, sparse
from scipy.sparse import linalg as splinalg

from . import units
from .bath import DrudeSpectralDensity, classical_limit, decompose
from .dissipators import total_markovian_generator
from .model import A, DIM, PHONON_MODES, couplings
from .operators import Dissipator, as_operator, basis_projector, spost, spre

DEFAULT_DEPTH = 6
DEFAULT_MEMORY_BUDGET = 2 * 1024**3  # bytes for one hierarchy vector


class HierarchyError(RuntimeError):
    pass


class PropagationError(HierarchyError):
    """Integrator failure; ``partial`` holds the samples written so far."""

    def __init__(self, message, last_time_fs=None, partial=None):
        super().__init__(message)
        self.last_time_fs = last_time_fs
        self.partial = partial


class SteadyStateError(HierarchyError):
    pass


# -- modes --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DissipatonMode:
    """One exponential term of one bath correlation channel.

    ``raise_op`` enters the commutator coupling to the tier above and
    ``lower_op`` the term coupling to the tier below.  For the literal
    ``(mu, nu, kappa)`` modes these are ``Q_mu`` and ``Q_nu``.
    """

    mu: object
    nu: object
    kappa: int
    xi: complex
    xi_conj_partner: complex
    rate: complex
    raise_op: np.ndarray
    lower_op: np.ndarray

    def __post_init__(self):
        if not np.real(self.rate) > 0:
            raise ValueError(f"mode rate needs a positive real part, got {self.rate}")

    @property
    def label(self):
        return f"{_tag(self.mu)}{_tag(self.nu)}:{self.kappa}"

    def with_xi(self, xi, xi_conj_partner):
        return DissipatonMode(
            self.mu, self.nu, self.kappa, xi, xi_conj_partner, self.rate, self.raise_op, self.lower_op
        )

    def to_mapping(self):
        return {
            "mu": self.mu if isinstance(self.mu, int) else list(self.mu),
            "nu": self.nu if isinstance(self.nu, int) else list(self.nu),
            "kappa": self.kappa,
            "xi": [float(np.real(self.xi)), float(np.imag(self.xi))],
            "xi_conj_partner": [float(np.real(self.xi_conj_partner)), float(np.imag(self.xi_conj_partner))],
            "rate": [float(np.real(self.rate)), float(np.imag(self.rate))],
        }


def _tag(x):
    return str(x) if isinstance(x, int) else "(" + "".join(str(v) for v in x) + ")"


def _coupling_ops(m, basis):
    cs = couplings(m)
    if basis == "eigen":
        return {mode: cs.rotated(mode) for mode in PHONON_MODES}
    if basis == "site":
        return dict(cs.phonon_couplings)
    raise ValueError(f"unknown basis {basis!r}")


def bath_series(m, scheme="pade", n_terms=2, classical=False):
    """Exponential series for every ``(mu, nu)`` pair with nonzero ``eta``."""
    table = {}
    for mu in PHONON_MODES:
        for nu in PHONON_MODES:
            j = m.spectral_density(mu, nu)
            if j.strength == 0:
                continue
            series = decompose(j, m.beta, scheme=scheme, n_terms=n_terms)
            table[(mu, nu)] = classical_limit(series) if classical else series
    return table


def enumerate_modes(m, series_table, basis="eigen"):
    """Literal mode list, ordered by ``mu``, then ``nu``, then ``kappa``."""
    ops = _coupling_ops(m, basis)
    modes = []
    for mu in PHONON_MODES:
        for nu in PHONON_MODES:
            if m.spectral_density(mu, nu).strength == 0:
                continue
            if (mu, nu) not in series_table:
                raise KeyError(f"no correlation series for coupled pair ({mu}, {nu})")
            s = series_table[(mu, nu)]
            xbc = s.xi_bar_conj()
            for k in range(len(s)):
                modes.append(
                    DissipatonMode(mu, nu, k, complex(s.xi[k]), complex(xbc[k]), complex(s.rates[k]), ops[mu], ops[nu])
                )
    return modes


def _components(eta, tol=0.0):
    n = eta.shape[0]
    seen, comps = set(), []
    for i in range(n):
        if i in seen:
            continue
        stack, comp = [i], []
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            comp.append(k)
            stack.extend(j for j in range(n) if j not in seen and abs(eta[k, j]) > tol)
        comps.append(sorted(comp))
    return comps


def effective_modes(m, scheme="pade", n_terms=2, classical=False, basis="eigen", tol=1e-12):
    """Compressed, exactly equivalent mode set.

    Correlated modes share one Drude density, so within each connected block
    ``J_{mu nu} = eta_{mu nu} J``.  Writing ``eta = sum_r w_r v_r v_r^T`` turns
    the block into independent baths coupled through
    ``sqrt(w_r) sum_mu v_{r mu} Q_mu``; zero eigenvalues drop out.  At
    ``eta = +/-1`` this halves the number of modes of the 4/5 pair.
    """
    ops = _coupling_ops(m, basis)
    modes = []
    for comp in _components(m.eta_matrix):
        channels = tuple(PHONON_MODES[i] for i in comp)
        lam, gam = m.drude_params[channels[0]]
        if lam == 0:
            continue
        block = m.eta_matrix[np.ix_(comp, comp)]
        w, v = np.linalg.eigh(block)
        series = decompose(DrudeSpectralDensity(1.0, lam, gam), m.beta, scheme=scheme, n_terms=n_terms)
        if classical:
            series = classical_limit(series)
        xbc = series.xi_bar_conj()
        for r in np.argsort(-w):
            if w[r] <= tol:
                continue
            vr = v[:, r] * np.sign(v[np.argmax(np.abs(v[:, r])), r])
            q = np.sqrt(w[r]) * sum(c * ops[ch] for c, ch in zip(vr, channels))
            tag = channels if len(channels) > 1 else channels[0]
            for k in range(len(series)):
                modes.append(
                    DissipatonMode(tag, tag, k, complex(series.xi[k]), complex(xbc[k]), complex(series.rates[k]), q, q)
                )
    return modes


# -- index space ----------------------------------------------------------------


def index_count(n_modes, depth):
    return comb(n_modes + depth, n_modes)


def _compositions(n_modes, depth):
    if n_modes == 0:
        yield ()
        return
    for first in range(depth + 1):
        for rest in _compositions(n_modes - 1, depth - first):
            yield (first,) + rest


def index_space(n_modes, depth, dim=DIM, memory_budget=DEFAULT_MEMORY_BUDGET):
    """All occupation vectors with total ``<= depth`` in lexicographic order.

    Returns an ``(C(K+L, K), K)`` integer array.
    """
    if n_modes < 0 or depth < 0:
        raise ValueError("need n_modes >= 0 and depth >= 0")
    size = index_count(n_modes, depth)
    need = size * dim * dim * 16
    if need > memory_budget:
        raise MemoryError(
            f"hierarchy with {n_modes} modes at depth {depth} has {size} ADOs "
            f"({need / 1e9:.2f} GB per state vector); lower the depth"
        )
    if n_modes == 0:
        return np.zeros((1, 0), dtype=np.int16)
    out = np.fromiter(
        (x for tup in _compositions(n_modes, depth) for x in tup), dtype=np.int16, count=size * n_modes
    )
    return out.reshape(size, n_modes)


def _neighbour_tables(indices, depth):
    """``plus[s, k]`` / ``minus[s, k]``: slot of ``n +/- e_k`` or -1."""
    n, k = indices.shape
    plus = np.full((n, k), -1, dtype=np.int64)
    minus = np.full((n, k), -1, dtype=np.int64)
    if k == 0:
        return plus, minus
    base = depth + 1
    if k * np.log2(base) < 62:
        weights = base ** np.arange(k - 1, -1, -1, dtype=np.int64)
        codes = indices.astype(np.int64) @ weights
        lookup = lambda c: np.searchsorted(codes, c)
    else:
        table = {tuple(row): s for s, row in enumerate(indices.tolist())}
        weights = None
    tiers = indices.sum(axis=1)
    for j in range(k):
        up = tiers < depth
        down = indices[:, j] > 0
        if weights is not None:
            plus[up, j] = lookup(codes[up] + weights[j])
            minus[down, j] = lookup(codes[down] - weights[j])
        else:
            for s in np.flatnonzero(up):
                row = indices[s].copy()
                row[j] += 1
                plus[s, j] = table[tuple(row)]
            for s in np.flatnonzero(down):
                row = indices[s].copy()
                row[j] -= 1
                minus[s, j] = table[tuple(row)]
    return plus, minus


# -- hierarchy --------------------------------------------------------------------


class Hierarchy:
    """Index space, adjacency and sparse generator of a truncated hierarchy.

    Parameters
    ----------
    modes : list of DissipatonMode
    depth : int
        Maximal tier ``L``.
    markovian : Dissipator
        Tier-independent Markovian generator (already includes ``-i[H, .]``).
    scaled : bool
        Store ADOs as ``rho_n / sqrt(prod n_k! s_k^n_k)`` with ``s_k = |xi_k|``.
        Tier 0 is unchanged; higher tiers become comparable in size, which
        helps the iterative steady-state solver.
    """

    def __init__(self, modes, depth, markovian, scaled=True, memory_budget=DEFAULT_MEMORY_BUDGET):
        self.modes = list(modes)
        self.depth = int(depth)
        self.markovian = markovian
        self.dim = markovian.dim
        self.scaled = scaled
        self.indices = index_space(len(self.modes), self.depth, self.dim, memory_budget)
        self.tiers = self.indices.sum(axis=1).astype(int)
        self.plus, self.minus = _neighbour_tables(self.indices, self.depth)
        mags = np.array([abs(md.xi) for md in self.modes])
        self.scales = np.where(mags > 0, mags, 1.0) if scaled else np.ones(len(self.modes))
        self._generator = None

    @property
    def n_ados(self):
        return len(self.indices)

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def size(self):
        return self.n_ados * self.dim**2

    def damping(self):
        """``sum_k n_k gamma_k`` for every ADO."""
        if not self.modes:
            return np.zeros(self.n_ados, dtype=complex)
        rates = np.array([md.rate for md in self.modes])
        return self.indices @ rates

    def _raise_superop(self, md):
        q = as_operator(md.raise_op)
        return sparse.csr_matrix(-1j * (spre(q) - spost(q)))

    def _lower_superop(self, md):
        q = as_operator(md.lower_op)
        return sparse.csr_matrix(-1j * (md.xi * spre(q) - md.xi_conj_partner * spost(q)))

    def generator(self):
        """Sparse matrix of the full hierarchy acting on the stacked vector."""
        if self._generator is not None:
            return self._generator
        n, d2 = self.n_ados, self.dim**2
        eye = sparse.identity(d2, format="csr")
        m = sparse.csr_matrix(self.markovian.matrix)
        gen = sparse.kron(sparse.identity(n), m) - sparse.kron(sparse.diags(self.damping()), eye)
        rows = np.arange(n)
        for k, md in enumerate(self.modes):
            s = self.scales[k]
            up = self.plus[:, k] >= 0
            occ = self.indices[up, k].astype(float)
            coef = np.sqrt((occ + 1) * s) if self.scaled else np.ones_like(occ)
            p = sparse.csr_matrix((coef, (rows[up], self.plus[up, k])), shape=(n, n))
            gen = gen + sparse.kron(p, self._raise_superop(md))
            dn = self.minus[:, k] >= 0
            occ = self.indices[dn, k].astype(float)
            coef = np.sqrt(occ / s) if self.scaled else occ
            p = sparse.csr_matrix((coef, (rows[dn], self.minus[dn, k])), shape=(n, n))
            gen = gen + sparse.kron(p, self._lower_superop(md))
        self._generator = sparse.csr_matrix(gen)
        return self._generator

    def norms(self):
        """Per-ADO factors ``sqrt(prod n_k! s_k^n_k)`` linking stored and physical ADOs."""
        if not self.scaled or not self.modes:
            return np.ones(self.n_ados)
        from scipy.special import gammaln

        logn = 0.5 * (gammaln(self.indices + 1.0).sum(axis=1) + self.indices @ np.log(self.scales))
        return np.exp(logn)

    def pack(self, state):
        """Physical ADO array ``(N, d, d)`` to the stored vector."""
        ados = np.asarray(state.ados if isinstance(state, HierarchyState) else state, dtype=complex)
        return (ados / self.norms()[:, None, None]).reshape(-1)

    def unpack(self, y):
        ados = np.asarray(y).reshape(self.n_ados, self.dim, self.dim) * self.norms()[:, None, None]
        return HierarchyState(ados=ados, hierarchy=self)

    def initial_state(self, rho0=None):
        """Factorised start: ``rho0`` in tier 0, all ADOs zero (default ``|a><a|``)."""
        if rho0 is None:
            rho0 = basis_projector(self.dim, A)
        ados = np.zeros((self.n_ados, self.dim, self.dim), dtype=complex)
        ados[0] = as_operator(rho0)
        return HierarchyState(ados=ados, hierarchy=self)

    def tier0_slice(self):
        return slice(0, self.dim**2)


@dataclass(eq=False)
class HierarchyState:
    """Physical (unscaled) ADOs stacked in index order."""

    ados: np.ndarray
    hierarchy: Hierarchy = field(repr=False)

    @property
    def rho(self):
        return self.ados[0]

    @property
    def depth(self):
        return self.hierarchy.depth

    @property
    def mode_table(self):
        return self.hierarchy.modes

    @property
    def indices(self):
        return self.hierarchy.indices

    def tier_norms(self):
        """Max entry magnitude over the ADOs of each tier."""
        tiers = self.hierarchy.tiers
        mags = np.abs(self.ados).reshape(len(tiers), -1).max(axis=1)
        return np.array([mags[tiers == t].max() for t in range(tiers.max() + 1)])


def deom_rhs(state, markovian=None):
    """Matrix-free time derivative of every physical ADO.

    Independent of :meth:`Hierarchy.generator`; the two are cross-checked in
    the test suite.
    """
    h = state.hierarchy
    markovian = markovian or h.markovian
    rho = state.ados
    n, d = rho.shape[0], rho.shape[1]
    out = (rho.reshape(n, d * d) @ markovian.matrix.T).reshape(n, d, d)
    out -= h.damping()[:, None, None] * rho
    zero = np.zeros((1, d, d), dtype=complex)
    padded = np.concatenate([rho, zero])  # slot -1 reads zeros
    for k, md in enumerate(h.modes):
        up = padded[h.plus[:, k]]
        qr = as_operator(md.raise_op)
        out += -1j * (qr @ up - up @ qr)
        dn = padded[h.minus[:, k]]
        ql = as_operator(md.lower_op)
        occ = h.indices[:, k][:, None, None]
        out += -1j * occ * (md.xi * (ql @ dn) - md.xi_conj_partner * (dn @ ql))
    return HierarchyState(ados=out, hierarchy=h)


# -- engines ------------------------------------------------------------------------

BACKENDS = ("deom", "deom-classical", "lindblad", "markovian")


@dataclass
class EngineOptions:
    backend: str = "deom"
    depth: int = DEFAULT_DEPTH
    scheme: str = "pade"
    n_terms: int = 2
    basis: str = "eigen"
    compress: bool = True
    scaled: bool = True


def build_hierarchy(m, options=None, **overrides):
    """Hierarchy for one of the backends.

    ``deom`` and ``deom-classical`` treat the phonon bath exactly (the latter
    keeps only the real part of each correlation function); ``lindblad``
    puts the phonon bath into a secular Lindblad term; ``markovian`` drops
    the phonon bath and keeps only light and release.
    """
    opts = options or EngineOptions()
    if overrides:
        opts = EngineOptions(**{**opts.__dict__, **overrides})
    if opts.backend not in BACKENDS:
        raise ValueError(f"unknown backend {opts.backend!r}; choose from {BACKENDS}")
    if opts.backend in ("lindblad", "markovian"):
        gen = total_markovian_generator(m, opts.backend == "lindblad", basis=opts.basis)
        return Hierarchy([], 0, gen, scaled=opts.scaled)
    classical = opts.backend == "deom-classical"
    if opts.compress:
        modes = effective_modes(m, opts.scheme, opts.n_terms, classical, opts.basis)
    else:
        table = bath_series(m, opts.scheme, opts.n_terms, classical)
        modes = enumerate_modes(m, table, opts.basis)
    gen = total_markovian_generator(m, False, basis=opts.basis)
    return Hierarchy(modes, opts.depth, gen, scaled=opts.scaled)


# -- propagation --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Tier-0 density matrices on a uniform grid, in the hierarchy's basis."""

    times_fs: np.ndarray
    rho: np.ndarray
    final: HierarchyState = field(repr=False)


def output_grid(t_final_fs, stride_fs):
    if t_final_fs <= 0:
        raise ValueError("t_final_fs must be positive")
    if stride_fs <= 0:
        raise ValueError("stride_fs must be positive")
    n = t_final_fs / stride_fs
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ValueError(f"stride {stride_fs} fs does not divide t_final {t_final_fs} fs")
    return stride_fs * np.arange(int(round(n)) + 1)


def propagate(hier, state=None, t_final_fs=1000.0, stride_fs=1.0, rtol=1e-8, atol=1e-10, method="DOP853"):
    """Adaptive explicit Runge-Kutta propagation of the full hierarchy.

    Returns a :class:`Trajectory`; only tier 0 is kept at each output time.

    ``rtol`` and ``atol`` bound the error per ADO. The integrator's RMS norm
    averages over the whole hierarchy, so both are divided by
    ``sqrt(n_ados)``; otherwise deep hierarchies with many small ADOs would
    loosen the control on the reduced density matrix.
    """
    state = state if state is not None else hier.initial_state()
    times = output_grid(t_final_fs, stride_fs)
    t_int = units.fs_to_internal(times)
    gen = hier.generator()
    y = hier.pack(state)
    d2 = hier.dim**2
    out = np.empty((len(times), hier.dim, hier.dim), dtype=complex)
    out[0] = y[:d2].reshape(hier.dim, hier.dim)
    if not gen.nnz:
        out[:] = out[0]
        return Trajectory(times, out, hier.unpack(y))
    solver_cls = {"DOP853": integrate.DOP853, "RK45": integrate.RK45, "RK23": integrate.RK23}[method]
    dilution = np.sqrt(hier.n_ados)
    solver = solver_cls(lambda t, v: gen @ v, t_int[0], y, t_int[-1], rtol=rtol / dilution, atol=atol / dilution)
    nxt = 1
    while nxt < len(times):
        prev_t = solver.t
        msg = solver.step()
        if solver.status == "failed":
            raise PropagationError(
                f"integrator failed at t = {units.internal_to_fs(prev_t):.6g} fs: {msg}",
                last_time_fs=float(units.internal_to_fs(prev_t)),
                partial=(times[:nxt], out[:nxt]),
            )
        if solver.t > prev_t:
            dense = solver.dense_output()
            while nxt < len(times) and t_int[nxt] <= solver.t:
                out[nxt] = dense(t_int[nxt])[:d2].reshape(hier.dim, hier.dim)
                nxt += 1
        if solver.status == "finished":
            while nxt < len(times):
                out[nxt] = solver.y[:d2].reshape(hier.dim, hier.dim)
                nxt += 1
    return Trajectory(times, out, hier.unpack(solver.y))


# -- steady state -------------------------------------------------------------------


def _trace_system(hier):
    """Generator with the ``rho_aa`` equation replaced by ``trace(rho_0) = 1``."""
    gen = hier.generator().tolil(copy=True)
    d = hier.dim
    gen[0, :] = 0
    for i in range(d):
        gen[0, i * d + i] = 1.0
    rhs = np.zeros(hier.size, dtype=complex)
    rhs[0] = 1.0
    return gen.tocsr(), rhs


def _block_jacobi(mat, n_blocks, bs, shift=1e-8):
    blocks = np.empty((n_blocks, bs, bs), dtype=complex)
    coo = mat.tocoo()
    rb, cb = coo.row // bs, coo.col // bs
    keep = rb == cb
    blocks[:] = 0
    np.add.at(blocks, (rb[keep], coo.row[keep] % bs, coo.col[keep] % bs), coo.data[keep])
    # tier-0 style blocks can be singular (dark states); a tiny shift keeps them invertible
    scale = np.abs(blocks).max(axis=(1, 2))
    blocks -= shift * scale[:, None, None] * np.eye(bs)
    inv = np.linalg.inv(blocks)

    def apply(v):
        return np.einsum("nij,nj->ni", inv, v.reshape(n_blocks, bs)).reshape(-1)

    return splinalg.LinearOperator(mat.shape, matvec=apply, dtype=complex)


def steady_state(hier, method="auto", tol=1e-12, maxiter=50, restart=200, direct_limit=20_000):
    """Stationary hierarchy with ``trace(rho_0) = 1``.

    ``method`` is ``"gmres"`` (block-Jacobi preconditioned), ``"direct"``
    (sparse LU) or ``"auto"`` (iterative first, direct when the iteration
    stalls and the system is small enough).
    """
    mat, rhs = _trace_system(hier)
    y = None
    if method in ("auto", "gmres") and hier.n_ados > 1:
        pre = _block_jacobi(mat, hier.n_ados, hier.dim**2)
        y, info = splinalg.gmres(mat, rhs, M=pre, rtol=tol, atol=0.0, restart=restart, maxiter=maxiter)
        if info != 0:
            if method == "gmres" or hier.size > direct_limit:
                raise SteadyStateError(
                    f"GMRES did not converge (info={info}); try a lower depth or long-time propagation"
                )
            y = None
    if y is None:
        if method == "gmres":
            raise SteadyStateError("iterative solve requested for a single-ADO system; use 'direct'")
        with warnings.catch_warnings():
            warnings.simplefilter("error", sparse.SparseEfficiencyWarning)
            try:
                y = splinalg.spsolve(mat.tocsc(), rhs)
            except RuntimeError as exc:
                raise SteadyStateError(f"sparse LU failed: {exc}") from exc
    state = hier.unpack(y)
    tr = np.trace(state.rho)
    if not np.isfinite(tr) or abs(tr - 1) > 1e-8:
        raise SteadyStateError(f"steady state has trace {tr}; normalisation failed")
    return state


# -- convergence --------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    parameter: str
    a: int
    b: int
    observable: str
    difference: float
    relative: float


def convergence_report(m, depths=(4, 6, 8), scheme_terms=(), backend="deom", times_fs=(), stride_fs=1.0, scheme="pade", n_terms=2, depth=None):
    """Differences of observables between successive depths and term counts.

    Observables are the steady-state populations (``rho_dd`` is reported
    first) and, for every time in ``times_fs``, the tier-0 populations from
    a propagation started in ``|a><a|``.
    """

    def observe(h):
        obs = {}
        ss = steady_state(h).rho
        labels = ("aa", "bb", "cc", "dd", "ee")
        obs["steady_rho_dd"] = float(np.real(ss[3, 3]))
        for i, lab in enumerate(labels):
            if lab != "dd":
                obs[f"steady_rho_{lab}"] = float(np.real(ss[i, i]))
        if len(times_fs):
            traj = propagate(h, t_final_fs=max(times_fs), stride_fs=stride_fs)
            for t in times_fs:
                i = int(np.argmin(np.abs(traj.times_fs - t)))
                for lab in ("aa", "dd"):
                    k = labels.index(lab)
                    obs[f"rho_{lab}@{t:g}fs"] = float(np.real(traj.rho[i, k, k]))
        return obs

    rows = []

    def compare(param, values, make):
        values = list(values)
        results = {}
        for v in dict.fromkeys(values):
            results[v] = observe(make(v))
        for a, b in zip(values, values[1:]):
            for key, va in results[a].items():
                vb = results[b][key]
                diff = abs(vb - va)
                rel = diff / abs(vb) if vb else diff
                rows.append(ConvergenceRow(param, a, b, key, diff, rel))

    base_depth = depth if depth is not None else DEFAULT_DEPTH
    if len(depths) >= 2:
        compare("depth", depths, lambda L: build_hierarchy(m, backend=backend, depth=L, scheme=scheme, n_terms=n_terms))
    if len(scheme_terms) >= 2:
        compare("n_terms", scheme_terms, lambda n: build_hierarchy(m, backend=backend, depth=base_depth, scheme=scheme, n_terms=n))
    return rows
