import json

import numpy as np

from thermadiab.hamiltonian import spin_operators
from thermadiab.scenario import encode_complex_matrix


def random_hermitian(rng, dim, norm=1.0):
    """Random Hermitian matrix with the given operator norm."""
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (x + x.conj().T) / 2
    return norm * h / np.max(np.abs(np.linalg.eigvalsh(h)))


def random_state(rng, dim, rank=None):
    x = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(x)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def taylor_exponential(h, dt, terms=60):
    """exp(-i H dt) by a truncated Taylor series."""
    result = np.eye(h.shape[0], dtype=complex)
    term = np.eye(h.shape[0], dtype=complex)
    for n in range(1, terms):
        term = term @ (-1j * dt * h) / n
        result = result + term
    return result


def wire_scenario(**overrides):
    """Scenario dictionary of the spin-1/2 wire drive with unit coupling."""
    _, s_y, s_z = spin_operators(0.5)
    data = dict(
        family=dict(
            variant="uniform_isospectral",
            H0=encode_complex_matrix(s_y),
            V=encode_complex_matrix(-s_z),
        ),
        omega=0.1,
        beta=1.0,
        s_max=np.pi,
        n_steps=201,
    )
    data.update(overrides)
    return data


def write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f)
    return path
