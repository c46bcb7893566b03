from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numba import jit

from thermadiab.hamiltonian.interface import DegenerateGap, UnorderedSpectrum
from thermadiab.hamiltonian.path import EigenbasisPath, _derivative_along_grid


@dataclass(frozen=True, eq=False)
class SpectralFunctionals:
    """Gap compression 1/mu_s and logarithmic gap drift nu_s per grid point."""

    grid: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    @property
    def mu_inv(self) -> np.ndarray:
        return 1.0 / self.mu


def adjacent_pair_functionals(gaps0, gaps, gap_derivatives):
    """1/mu and nu from adjacent gaps only; works on stacks along axis 0."""
    gaps0, gaps, gap_derivatives = (
        np.asarray(gaps0, dtype=float),
        np.asarray(gaps, dtype=float),
        np.asarray(gap_derivatives, dtype=float),
    )
    if gaps.shape[-1] == 0:
        shape = gaps.shape[:-1]
        return np.ones(shape), np.zeros(shape)
    mu_inv = np.max(np.abs(gaps0 / gaps), axis=-1)
    nu = np.max(np.abs(gap_derivatives / gaps), axis=-1)
    return mu_inv, nu


def spectral_functionals(path: EigenbasisPath) -> SpectralFunctionals:
    """mu_s and nu_s from adjacent matched gaps on the path grid.

    The log-derivative of the gaps is taken on the path grid itself, so all
    s-sampled quantities share one grid for quadrature.
    """
    n = path.n_points
    if path.family.is_isospectral or path.dim == 1:
        return SpectralFunctionals(path.grid, np.ones(n), np.zeros(n))

    gaps = path.gaps
    smallest = np.min(np.abs(gaps))
    if smallest < path.degeneracy_threshold:
        k, m = np.unravel_index(np.argmin(np.abs(gaps)), gaps.shape)
        raise DegenerateGap(
            f"gap {m} is {gaps[k, m]:.3e} at s = {path.grid[k]:.6g}"
            f" (threshold {path.degeneracy_threshold:.3e})"
        )
    gap_derivatives = _derivative_along_grid(gaps, path.grid)
    mu_inv, nu = adjacent_pair_functionals(gaps[0], gaps, gap_derivatives)
    return SpectralFunctionals(path.grid, 1.0 / mu_inv, nu)


@jit(nopython=True)
def _all_pairs(e0, es, des):
    mu_inv = 1.0
    nu = 0.0
    first = True
    d = len(es)
    for m in range(d):
        for n in range(m):
            gap = es[m] - es[n]
            ratio = abs((e0[m] - e0[n]) / gap)
            drift = abs((des[m] - des[n]) / gap)
            if first or ratio > mu_inv:
                mu_inv = ratio
            if first or drift > nu:
                nu = drift
            first = False
    return mu_inv, nu


def all_pairs_oracle(e0, es, des) -> Tuple[float, float]:
    """Brute-force 1/mu and nu over every level pair m > n.

    For ordered spectra this coincides with the adjacent-pair maximum.
    """
    e0, es, des = (np.ascontiguousarray(a, dtype=np.float64) for a in (e0, es, des))
    if not (e0.shape == es.shape == des.shape) or e0.ndim != 1:
        raise ValueError("energy vectors must be one-dimensional with equal length")
    if np.any(np.diff(es) <= 0):
        raise UnorderedSpectrum("energies at s must be strictly increasing")
    if len(es) < 2:
        return 1.0, 0.0
    mu_inv, nu = _all_pairs(e0, es, des)
    return float(mu_inv), float(nu)


def lemma_discrepancy(e0, es, des) -> float:
    """Largest relative difference between the all-pairs and
    adjacent-pair values of 1/mu and nu.
    """
    oracle = all_pairs_oracle(e0, es, des)
    adjacent = adjacent_pair_functionals(np.diff(e0), np.diff(es), np.diff(des))
    return max(
        abs(a - float(b)) / max(1.0, abs(a)) for a, b in zip(oracle, adjacent)
    )
