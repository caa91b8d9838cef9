"""Dense operator algebra on a small Hilbert space.

Operators are plain ``complex`` numpy arrays of shape ``(d, d)``.  Superoperators
act on row-major vectorised operators, ``vec(X) = X.reshape(-1)``, so that::

    vec(A @ X @ B) == np.kron(A, B.T) @ vec(X)
"""

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10


class DimensionError(ValueError):
    pass


def as_operator(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"operator must be square, got shape {a.shape}")
    return a


def basis_projector(dim, i, j=None):
    """``|i><j|`` (``|i><i|`` when ``j`` is omitted)."""
    j = i if j is None else j
    out = np.zeros((dim, dim), dtype=complex)
    out[i, j] = 1.0
    return out


def dag(a):
    return np.conj(a).T


def commutator(a, b):
    a, b = as_operator(a), as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def anticommutator(a, b):
    a, b = as_operator(a), as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b + b @ a


def hermiticity_error(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a - dag(a)))) if a.size else 0.0


def is_hermitian(a, tol=HERMITIAN_TOL):
    scale = max(1.0, float(np.max(np.abs(a)))) if np.size(a) else 1.0
    return hermiticity_error(a) <= tol * scale


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues in ascending order and the eigenvectors as columns."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return len(self.energies)

    def transition_frequencies(self):
        """``omega[m, n] = e_m - e_n``."""
        return self.energies[:, None] - self.energies[None, :]

    def to_eigenbasis(self, op):
        return dag(self.vectors) @ op @ self.vectors

    def from_eigenbasis(self, op):
        return self.vectors @ op @ dag(self.vectors)


def _fix_column_signs(vectors, tol=1e-12):
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        mags = np.abs(col)
        # tie-break on the lowest row index among near-maximal entries
        k = int(np.flatnonzero(mags >= mags.max() - tol)[0])
        phase = col[k] / mags[k]
        vectors[:, j] = col / phase
    return vectors


def eigh(h):
    """Hermitian eigendecomposition with a reproducible sign convention.

    Eigenvalues are ascending.  Each eigenvector is normalised so that its
    largest-magnitude entry (lowest row index on ties) is real and positive.
    Real symmetric input yields real eigenvectors.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"operator must be square, got shape {h.shape}")
    if not is_hermitian(h):
        raise ValueError(
            f"eigh requires a Hermitian operator (max |H - H^+| = {hermiticity_error(h):.3g})"
        )
    if np.all(np.imag(h) == 0):
        h = np.real(h)
    else:
        h = 0.5 * (h + dag(h))
    energies, vectors = np.linalg.eigh(h)
    vectors = _fix_column_signs(vectors)
    if np.isrealobj(h):
        vectors = np.real(vectors)
    return EigenSystem(energies=energies, vectors=vectors)


# -- superoperators ---------------------------------------------------------


def vec(op):
    return np.asarray(op).reshape(-1)


def unvec(v, dim=None):
    v = np.asarray(v)
    dim = dim or int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim)


def spre(a):
    """Matrix of ``X -> A X``."""
    a = as_operator(a)
    return np.kron(a, np.eye(a.shape[0]))


def spost(b):
    """Matrix of ``X -> X B``."""
    b = as_operator(b)
    return np.kron(np.eye(b.shape[0]), b.T)


def sprepost(a, b):
    """Matrix of ``X -> A X B``."""
    return np.kron(as_operator(a), as_operator(b).T)


def commutator_superop(a):
    """Matrix of ``X -> [A, X]``."""
    return spre(a) - spost(a)


def lindblad_dissipator(l_op, rate=1.0):
    """Matrix of ``X -> rate (L X L^+ - {L^+ L, X}/2)``."""
    l_op = as_operator(l_op)
    ldl = dag(l_op) @ l_op
    return rate * (sprepost(l_op, dag(l_op)) - 0.5 * (spre(ldl) + spost(ldl)))


@dataclass(frozen=True, eq=False)
class Dissipator:
    """A linear map on operators stored as a dense Liouville-space matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d2 = m.shape[0]
        d = int(round(np.sqrt(d2)))
        if m.shape != (d2, d2) or d * d != d2:
            raise DimensionError(f"not a Liouville-space matrix: shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return int(round(np.sqrt(self.matrix.shape[0])))

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((dim * dim, dim * dim), dtype=complex))

    @classmethod
    def hamiltonian(cls, h):
        """``X -> -i [H, X]``."""
        return cls(-1j * commutator_superop(h))

    def __call__(self, rho):
        return apply_superop(self, rho)

    def __add__(self, other):
        if not isinstance(other, Dissipator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return Dissipator(self.matrix + other.matrix)

    def __mul__(self, scalar):
        return Dissipator(scalar * self.matrix)

    __rmul__ = __mul__

    def transform(self, u):
        """Same map expressed in the basis given by the columns of ``u``.

        If ``X' = U^+ X U`` then the returned dissipator acts on ``X'``.
        """
        fwd = sprepost(dag(u), u)
        back = sprepost(u, dag(u))
        return Dissipator(fwd @ self.matrix @ back)


def apply_superop(superop, rho):
    rho = as_operator(rho)
    if superop.dim != rho.shape[0]:
        raise DimensionError(
            f"superoperator acts on dim {superop.dim}, operator has dim {rho.shape[0]}"
        )
    return unvec(superop.matrix @ vec(rho), rho.shape[0])
