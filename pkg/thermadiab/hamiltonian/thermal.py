import numpy as np
from scipy import linalg as sla

from thermadiab.linalg import DensityMatrix, as_hermitian, hermitianize
from thermadiab.hamiltonian.interface import check_beta


def boltzmann_weights(energies, beta) -> np.ndarray:
    """exp(-beta E_n) / Z with the energy origin moved to min(E)."""
    beta = check_beta(beta)
    energies = np.asarray(energies, dtype=float)
    if beta == 0:
        return np.full(energies.shape, 1.0 / energies.size)
    weights = np.exp(-beta * (energies - energies.min()))
    return weights / weights.sum()


def gibbs_state(h, beta) -> DensityMatrix:
    """exp(-beta H) / tr exp(-beta H), built in the eigenbasis of H."""
    h = as_hermitian(h)
    beta = check_beta(beta)
    if beta == 0:
        return DensityMatrix(np.eye(h.shape[0], dtype=complex) / h.shape[0])
    energies, vectors = sla.eigh(h)
    weights = boltzmann_weights(energies, beta)
    return DensityMatrix(hermitianize((vectors * weights) @ vectors.conj().T))
