"""Dense complex linear algebra: Hermitian eigendecompositions, matrix
functions and distances between density matrices.

Every function accepts plain numpy arrays as well as the
:class:`HermitianOperator` / :class:`DensityMatrix` wrappers.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg as sla

from thermadiab.utilities import ThermadiabError


HERMITICITY_RTOL = 1e-12
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
SQRT_NEGATIVE_LIMIT = -1e-8


class NonHermitianInput(ThermadiabError):
    pass


class NegativeEigenvalue(ThermadiabError):
    pass


class DimensionMismatch(ThermadiabError):
    pass


class InvalidDensityMatrix(ThermadiabError):
    pass


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^*) / 2."""
    return (a + a.conj().swapaxes(-1, -2)) / 2


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(
            f"expected a non-empty square matrix, got shape {a.shape}"
        )
    return a


def as_hermitian(a) -> np.ndarray:
    """Validated complex array view of a Hermitian input."""
    a = _square(a)
    scale = max(1.0, float(np.max(np.abs(a))))
    defect = hermiticity_defect(a)
    if not defect <= HERMITICITY_RTOL * scale:
        raise NonHermitianInput(
            f"max |A - A^dagger| = {defect:.3e} exceeds {HERMITICITY_RTOL:g} relative"
        )
    return a


def _same_dims(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Immutable dense Hermitian matrix (hbar = 1, energy units)."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(as_hermitian(self.entries), dtype=complex)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


@dataclass(frozen=True, eq=False)
class DensityMatrix(HermitianOperator):
    """Positive semidefinite Hermitian matrix with unit trace."""

    def __post_init__(self):
        super().__post_init__()
        eigenvalues = np.linalg.eigvalsh(self.entries)
        if eigenvalues[0] < -PSD_ATOL:
            raise InvalidDensityMatrix(f"negative eigenvalue {eigenvalues[0]:.3e}")
        trace = np.trace(self.entries).real
        if abs(trace - 1) > TRACE_ATOL:
            raise InvalidDensityMatrix(f"trace {trace!r} differs from 1")

    @property
    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def fix_column_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate every column so that its largest component is real positive."""
    pivots = np.argmax(np.abs(vectors), axis=0)
    pivot_values = vectors[pivots, np.arange(vectors.shape[1])]
    phases = pivot_values / np.abs(pivot_values)
    return vectors * phases.conj()[np.newaxis, :]


def eig_hermitian(h) -> SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of a
    Hermitian matrix, with a reproducible phase convention.

    Degenerate subspaces get an arbitrary but deterministic basis.
    """
    h = as_hermitian(h)
    eigenvalues, eigenvectors = sla.eigh(h)
    return SpectralDecomposition(eigenvalues, fix_column_phases(eigenvectors))


def operator_norm(h) -> float:
    """Largest absolute eigenvalue."""
    h = as_hermitian(h)
    return float(np.max(np.abs(np.linalg.eigvalsh(h))))


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of Hermitian matrices with shape (n, d, d)."""
    stack = np.asarray(stack)
    if stack.shape[0] == 0:
        return np.zeros(0)
    return np.max(np.abs(np.linalg.eigvalsh(hermitianize(stack))), axis=-1)


def spectral_exponential(
    eigenvalues: np.ndarray, eigenvectors: np.ndarray, dt: float
) -> np.ndarray:
    """exp(-i H dt) from the spectral decomposition of H."""
    phases = np.exp(-1j * eigenvalues * dt)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def propagator_step(h, dt: float) -> np.ndarray:
    """Unitary W = exp(-i H dt) computed in the eigenbasis of H."""
    if not np.isfinite(dt):
        raise ValueError(f"time step must be finite, got {dt}")
    h = as_hermitian(h)
    eigenvalues, eigenvectors = sla.eigh(h)
    return spectral_exponential(eigenvalues, eigenvectors, dt)


def matrix_sqrt_psd(rho) -> HermitianOperator:
    """Positive square root of a positive semidefinite matrix.

    Eigenvalues between -1e-8 and 0 are clipped to 0.
    """
    rho = as_hermitian(rho)
    eigenvalues, eigenvectors = sla.eigh(rho)
    if eigenvalues[0] < SQRT_NEGATIVE_LIMIT:
        raise NegativeEigenvalue(
            f"eigenvalue {eigenvalues[0]:.3e} below {SQRT_NEGATIVE_LIMIT:g}"
        )
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    root = (eigenvectors * roots) @ eigenvectors.conj().T
    return HermitianOperator(hermitianize(root))


def trace_distance(rho1, rho2) -> float:
    """(1/2) tr|rho2 - rho1|."""
    rho1, rho2 = as_hermitian(rho1), as_hermitian(rho2)
    _same_dims(rho1, rho2)
    eigenvalues = np.linalg.eigvalsh(hermitianize(rho2 - rho1))
    return float(0.5 * np.sum(np.abs(eigenvalues)))


def trace_distances(stack1: np.ndarray, stack2: np.ndarray) -> np.ndarray:
    """Trace distances between two stacks of states, pairwise along axis 0."""
    stack1, stack2 = np.asarray(stack1), np.asarray(stack2)
    _same_dims(stack1, stack2)
    eigenvalues = np.linalg.eigvalsh(hermitianize(stack2 - stack1))
    return 0.5 * np.sum(np.abs(eigenvalues), axis=-1)


def root_overlap(rho1, rho2) -> float:
    """tr(sqrt(rho1) sqrt(rho2))."""
    rho1, rho2 = as_hermitian(rho1), as_hermitian(rho2)
    _same_dims(rho1, rho2)
    product = matrix_sqrt_psd(rho1).entries @ matrix_sqrt_psd(rho2).entries
    return float(np.trace(product).real)


def affinity_defect(rho1, rho2) -> float:
    """D = 1 - tr(sqrt(rho1) sqrt(rho2)), clipped to [0, 1]."""
    return float(np.clip(1.0 - root_overlap(rho1, rho2), 0.0, 1.0))


def _pure_fidelity(state1, state2) -> float:
    if np.ndim(state1) != 1:
        state1, state2 = state2, state1
    psi = np.asarray(state1, dtype=complex)
    if np.ndim(state2) == 1:
        phi = np.asarray(state2, dtype=complex)
        _same_dims(psi, phi)
        return float(np.abs(np.vdot(psi, phi)) ** 2)
    rho = as_hermitian(state2)
    _same_dims(psi, rho[0])
    return float(np.vdot(psi, rho @ psi).real)


def fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.

    Either argument may be a normalized state vector psi, the fidelity then
    is <psi|rho|psi> and needs no square roots.
    """
    if np.ndim(rho1) == 1 or np.ndim(rho2) == 1:
        return _pure_fidelity(rho1, rho2)
    rho1, rho2 = as_hermitian(rho1), as_hermitian(rho2)
    _same_dims(rho1, rho2)
    root = matrix_sqrt_psd(rho1).entries
    inner = np.linalg.eigvalsh(hermitianize(root @ rho2 @ root))
    return float(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2)


def purity(rho) -> float:
    rho = as_hermitian(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def unitary_generator(x: np.ndarray) -> Tuple[np.ndarray, float]:
    """Hermitian G with X = exp(iG) for a unitary X, and the largest
    rotation angle |G|.

    Uses the complex Schur form, which is diagonal for normal matrices;
    angles are taken on the principal branch (-pi, pi].
    """
    x = _square(x)
    triangular, basis = sla.schur(x, output="complex")
    angles = np.angle(np.diag(triangular))
    generator = hermitianize((basis * angles) @ basis.conj().T)
    return generator, float(np.max(np.abs(angles), initial=0.0))
