from typing import Callable, Tuple

import numpy as np
from scipy import linalg as sla

from thermadiab.linalg import as_hermitian, DimensionMismatch
from thermadiab.hamiltonian.interface import DrivenHamiltonian


def spin_operators(spin: float = 0.5) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S_x, S_y, S_z for spin magnitude S in the basis m = S, S-1, ..., -S."""
    twice = 2 * spin
    if twice < 1 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {spin}")
    m = spin - np.arange(int(round(twice)) + 1)
    # <m + 1| S+ |m> on the first superdiagonal
    raising = np.diag(np.sqrt(spin * (spin + 1) - m[1:] * (m[1:] + 1)), k=1)
    lowering = raising.T
    s_x = (raising + lowering) / 2
    s_y = (raising - lowering) / 2j
    s_z = np.diag(m)
    return s_x.astype(complex), s_y.astype(complex), s_z.astype(complex)


class UniformIsospectral(DrivenHamiltonian):
    """H_s = exp(isV) H0 exp(-isV).

    The gauge velocity of this family is V itself, the spectral functionals
    are trivial (mu = 1, nu = 0).
    """

    is_isospectral = True

    def __init__(self, h0, v):
        self.h0 = np.array(as_hermitian(h0))
        self.v = np.array(as_hermitian(v))
        if self.h0.shape != self.v.shape:
            raise DimensionMismatch(
                f"H0 {self.h0.shape} and V {self.v.shape} must have equal shapes"
            )
        self._v_eigenvalues, self._v_eigenvectors = sla.eigh(self.v)
        self.analytic_velocity = self.v

    @property
    def dim(self):
        return self.h0.shape[0]

    def rotation(self, s):
        """exp(isV)"""
        phases = np.exp(1j * s * self._v_eigenvalues)
        return (self._v_eigenvectors * phases) @ self._v_eigenvectors.conj().T

    def _matrix(self, s):
        u = self.rotation(s)
        return u @ self.h0 @ u.conj().T


class DilatedIsospectral(UniformIsospectral):
    """H_s = (1 + dilation * s) exp(isV) H0 exp(-isV): the eigenvectors rotate
    as in the uniform case while all gaps are stretched linearly in s.
    """

    is_isospectral = False

    def __init__(self, h0, v, dilation=0.0):
        super().__init__(h0, v)
        self.dilation = float(dilation)

    def _matrix(self, s):
        return (1 + self.dilation * s) * super()._matrix(s)


def constant_family(h0) -> UniformIsospectral:
    """H_s = H0 for every s."""
    h0 = as_hermitian(h0)
    return UniformIsospectral(h0, np.zeros_like(h0))


class Generic(DrivenHamiltonian):
    """Family defined by an arbitrary callable s -> matrix."""

    def __init__(self, function: Callable[[float], np.ndarray], dim: int):
        self.function = function
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def _matrix(self, s):
        return self.function(s)


class LinearInterpolation(DrivenHamiltonian):
    """H_s = (1 - s/s_max) A + (s/s_max) B"""

    def __init__(self, a, b, s_max):
        self.a = np.array(as_hermitian(a))
        self.b = np.array(as_hermitian(b))
        if self.a.shape != self.b.shape:
            raise DimensionMismatch(
                f"A {self.a.shape} and B {self.b.shape} must have equal shapes"
            )
        if not s_max > 0:
            raise ValueError(f"s_max must be positive, got {s_max}")
        self.s_max = float(s_max)

    @property
    def dim(self):
        return self.a.shape[0]

    def _matrix(self, s):
        x = s / self.s_max
        return (1 - x) * self.a + x * self.b
