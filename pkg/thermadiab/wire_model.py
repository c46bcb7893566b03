"""A spin next to a current-carrying wire.

The electrons drive the spin through the effective Hamiltonian
gamma (-sin(alpha) S_x + cos(alpha) S_y), i.e. uniform isospectral driving
with H0 = gamma S_y and V = -S_z, where alpha is the angle of the spin
around the wire. Pure-state adiabaticity needs driving rates that vanish
with the number of electrons, the finite-temperature bound does not.
"""
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
import numbers
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats
from scipy.optimize import brentq

from thermadiab.linalg import HermitianOperator, fidelity
from thermadiab.hamiltonian import (
    DrivingSchedule,
    UniformIsospectral,
    spin_operators,
)
from thermadiab.adiabaticity import audit_drive
from thermadiab.evolution import propagate
from thermadiab.utilities import ThermadiabError


class UndefinedLimit(ThermadiabError):
    pass


class EpsilonOutOfRange(ThermadiabError):
    pass


class NonPositiveBeta(ThermadiabError):
    pass


class InsufficientSpan(ThermadiabError):
    pass


class InvalidWireParameters(ThermadiabError):
    pass


@dataclass
class WireModelParams:
    """Wire and electron parameters in reduced units (hbar = 1)."""

    mu_magn: float = 1.0
    r: float = 1.0
    e_charge: float = 1.0
    m_e: float = 1.0
    rho_density: float = 1.0
    A: float = 1.0
    N: int = 1
    S: float = 0.5
    p_F: float = 1.0
    P_e: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise InvalidWireParameters(f"N must be >= 1, got {self.N}")
        if not self.r > 0:
            raise InvalidWireParameters(f"r must be > 0, got {self.r}")
        twice = 2 * self.S
        if twice < 1 or abs(twice - round(twice)) > 1e-12:
            raise InvalidWireParameters(
                f"S must be a positive half-integer, got {self.S}"
            )

    @property
    def gamma(self) -> float:
        return gamma_coupling(self)


def gamma_coupling(params: WireModelParams, P_e=None):
    """gamma = -(mu / (2 pi r)) (e rho A / (m_e N)) P_e

    ``P_e`` may be given separately (also as an array of samples).
    """
    P_e = params.P_e if P_e is None else P_e
    return (
        -(params.mu_magn / (2 * np.pi * params.r))
        * (params.e_charge * params.rho_density * params.A / (params.m_e * params.N))
        * P_e
    )


def effective_hamiltonian(
    gamma: float, alpha: float, S: float = 0.5
) -> HermitianOperator:
    s_x, s_y, _ = spin_operators(S)
    return HermitianOperator(gamma * (-np.sin(alpha) * s_x + np.cos(alpha) * s_y))


def wire_family(gamma: float, S: float = 0.5) -> UniformIsospectral:
    """Uniform isospectral family whose value at s = alpha is the
    effective Hamiltonian."""
    _, s_y, s_z = spin_operators(S)
    return UniformIsospectral(gamma * s_y, -s_z)


class WireSpin(UniformIsospectral):
    """The wire family built from microscopic parameters."""

    def __init__(self, params: WireModelParams):
        self.params = params
        _, s_y, s_z = spin_operators(params.S)
        super().__init__(gamma_coupling(params) * s_y, -s_z)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def psa_fidelity_analytic(omega, gamma, alpha):
    """Pure-state infidelity 1 - F of a spin-1/2 dragged around the wire:
    (omega^2 / (omega^2 + gamma^2)) sin^2((alpha / 2) sqrt(1 + gamma^2 / omega^2)).
    """
    omega, gamma, alpha = np.broadcast_arrays(
        np.asarray(omega, dtype=float),
        np.asarray(gamma, dtype=float),
        np.asarray(alpha, dtype=float),
    )
    if np.any((omega == 0) & (gamma == 0)):
        raise UndefinedLimit("the infidelity is undefined for omega = gamma = 0")
    rabi = np.sqrt(omega**2 + gamma**2)
    frozen = omega == 0
    safe_omega = np.where(frozen, 1.0, np.abs(omega))
    infidelity = (omega**2 / rabi**2) * np.sin(alpha * rabi / (2 * safe_omega)) ** 2
    return _scalar_or_array(np.where(frozen, 0.0, infidelity))


def _check_epsilon(epsilon):
    if not 0 < epsilon < 1:
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1), got {epsilon}")


def psa_critical_rate(gamma, epsilon):
    """Largest driving rate keeping the pure-state infidelity below epsilon
    for target angles beyond pi: |gamma| sqrt(epsilon / (1 - epsilon)).
    """
    _check_epsilon(epsilon)
    return _scalar_or_array(np.abs(gamma) * np.sqrt(epsilon / (1 - epsilon)))


def simulate_psa_infidelity(omega: float, gamma: float, alphas, S: float = 0.5):
    """1 - F between the driven state and the instantaneous eigenstate it
    started in, from the exact rotating-frame evolution.

    In the rotating frame the evolution is generated by the constant
    H0 + omega V, and the instantaneous eigenstate is the rotated initial one,
    so F(alpha) = |<phi_0| exp(-i (H0 + omega V) alpha / omega) |phi_0>|^2.
    """
    if omega <= 0:
        raise UndefinedLimit(f"omega must be > 0, got {omega}")
    _, s_y, s_z = spin_operators(S)
    # reference eigenstate of the undriven field direction
    reference = np.linalg.eigh((gamma if gamma != 0 else 1.0) * s_y)[1][:, 0]
    energies, vectors = np.linalg.eigh(gamma * s_y - omega * s_z)
    weights = np.abs(vectors.conj().T @ reference) ** 2
    times = np.asarray(alphas, dtype=float) / omega
    amplitudes = np.exp(-1j * np.multiply.outer(times, energies)) @ weights
    return _scalar_or_array(1.0 - np.abs(amplitudes) ** 2)


def max_psa_infidelity(omega, gamma, alpha_max, n_alpha=4001, S=0.5):
    alphas = np.linspace(0.0, alpha_max, n_alpha)
    return float(np.max(simulate_psa_infidelity(omega, gamma, alphas, S)))


def propagated_psa_infidelity(
    omega: float,
    gamma: float,
    alpha_max: float,
    n_steps: int,
    n_points: int = 9,
    S: float = 0.5,
) -> pd.DataFrame:
    """1 - F of the ground state dragged around the wire, from midpoint
    propagation in the lab frame instead of the rotating-frame solution.

    The infidelity is read off at ``n_points`` evenly spaced grid points
    between alpha = 0 and ``alpha_max``.
    """
    if omega <= 0:
        raise UndefinedLimit(f"omega must be > 0, got {omega}")
    if gamma == 0:
        raise UndefinedLimit("the instantaneous eigenstate is undefined for gamma = 0")
    family = wire_family(gamma, S)
    ground = np.linalg.eigh(family.matrix(0.0))[1][:, 0]
    traj = propagate(
        family,
        DrivingSchedule(omega, alpha_max, n_steps),
        0.0,
        initial_state=np.outer(ground, ground.conj()),
    )
    indices = np.unique(np.linspace(0, len(traj.s_values) - 1, n_points).round())
    rows = []
    for k in indices.astype(int):
        alpha = traj.s_values[k]
        instantaneous = np.linalg.eigh(family.matrix(alpha))[1][:, 0]
        rows.append(
            dict(alpha=alpha, infidelity=1.0 - fidelity(instantaneous, traj.states[k]))
        )
    return pd.DataFrame(rows)


def psa_critical_rate_search(
    gamma: float, epsilon: float, alpha_max: float = 1.5 * np.pi, n_alpha: int = 4001
) -> float:
    """Largest omega with max over alpha <= alpha_max of the simulated
    infidelity below epsilon, located by bracketing root search.
    """
    _check_epsilon(epsilon)
    if gamma == 0:
        return 0.0

    def excess(omega):
        return max_psa_infidelity(omega, gamma, alpha_max, n_alpha) - epsilon

    low = 1e-6 * abs(gamma)
    high = abs(gamma)
    while excess(high) < 0:
        high *= 2
    return float(brentq(excess, low, high, xtol=1e-12 * abs(gamma)))


def finite_T_sufficient_rate(
    epsilon: float, beta: float, S: float = 0.5, alpha: float = np.pi
) -> float:
    """Driving rate that keeps the finite-temperature distance below epsilon
    up to the angle alpha: epsilon^2 / (sqrt(2) beta S (1 + sqrt(2) alpha S)).
    It does not depend on the number of electrons.
    """
    _check_epsilon(epsilon)
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")
    return float(epsilon**2 / (np.sqrt(2) * beta * S * (1 + np.sqrt(2) * alpha * S)))


def sample_total_momentum(
    N: int,
    p_F: float,
    seed: Union[int, np.random.SeedSequence],
    size: Optional[int] = None,
):
    """Total electron momentum as a sum of N independent zero-mean Gaussian
    momenta of spread p_F, i.e. a single normal draw of spread p_F sqrt(N).
    """
    if N < 1:
        raise InvalidWireParameters(f"N must be >= 1, got {N}")
    rng = np.random.default_rng(seed)
    return _scalar_or_array(rng.normal(0.0, p_F * np.sqrt(N), size))


@dataclass
class ScalingResult:
    table: pd.DataFrame
    slope: float
    intercept: float
    stderr: float

    @property
    def fit(self) -> dict:
        return dict(slope=self.slope, intercept=self.intercept, stderr=self.stderr)


def scaling_experiment(
    N_list: Sequence[int],
    p_F: float,
    epsilon: float,
    samples: int,
    seed: int,
    params: Optional[WireModelParams] = None,
    fixed_P_e: Optional[float] = None,
) -> ScalingResult:
    """Median pure-state critical rate against the number of electrons, with
    a least-squares fit of log(median) against log(N).

    Every N draws from its own generator spawned from ``seed``, so results
    do not depend on the order in which the N are processed.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 2 or min(N_list) < 1 or np.log10(max(N_list) / min(N_list)) < 2:
        raise InsufficientSpan(f"N values {N_list} must span at least two decades")
    _check_epsilon(epsilon)
    params = WireModelParams(p_F=p_F) if params is None else params

    rows = []
    for N, child in zip(N_list, np.random.SeedSequence(seed).spawn(len(N_list))):
        if fixed_P_e is None:
            momenta = np.atleast_1d(sample_total_momentum(N, p_F, child, samples))
        else:
            momenta = np.full(samples, fixed_P_e)
        gammas = gamma_coupling(replace(params, N=N), P_e=momenta)
        rates = np.atleast_1d(psa_critical_rate(gammas, epsilon))
        q25, median, q75 = np.quantile(rates, [0.25, 0.5, 0.75])
        rows.append(dict(N=N, median_omega_eps=median, q25=q25, q75=q75))

    table = pd.DataFrame(rows, columns=["N", "median_omega_eps", "q25", "q75"])
    fit = stats.linregress(np.log(table["N"]), np.log(table["median_omega_eps"]))
    return ScalingResult(
        table, float(fit.slope), float(fit.intercept), float(fit.stderr)
    )


@dataclass
class ContrastResult:
    max_psa_infidelity: float
    max_finite_T_distance: float
    final_rhs: float


def headline_contrast(
    gamma: float,
    beta: float,
    omega: float,
    alpha_max: float = np.pi,
    n_steps: int = 2001,
) -> ContrastResult:
    """Pure-state infidelity and finite-temperature distance on the same
    drive of the wire spin.
    """
    psa = max_psa_infidelity(omega, gamma, alpha_max)
    schedule = DrivingSchedule(omega, alpha_max, n_steps)
    report = audit_drive(wire_family(gamma), schedule, beta).report
    return ContrastResult(
        psa, float(np.max(report.lhs_measured)), float(report.rhs_total[-1])
    )


def _real(name, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidWireParameters(f"{name} must be a number, got {value!r}")
    if not np.isfinite(value):
        raise InvalidWireParameters(f"{name} must be finite, got {value}")
    return float(value)


def _count(name, value, minimum) -> int:
    value = _real(name, value)
    if value != int(value) or value < minimum:
        raise InvalidWireParameters(f"{name} must be an integer >= {minimum}")
    return int(value)


def _reals(name, values) -> List[float]:
    if isinstance(values, (str, bytes)) or not isinstance(values, Iterable):
        raise InvalidWireParameters(f"{name} must be a list of numbers")
    values = [_real(name, v) for v in values]
    if not values:
        raise InvalidWireParameters(f"{name} must not be empty")
    return values


@dataclass
class WireExperiment:
    """Parameters of the ``thermadiab wire`` experiments."""

    gamma: float = 1.0
    beta: float = 1.0
    S: float = 0.5
    alpha: float = np.pi
    epsilons: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.5])
    omegas: List[float] = field(
        default_factory=lambda: list(np.geomspace(0.1, 10, 10))
    )
    gammas: List[float] = field(
        default_factory=lambda: list(np.geomspace(0.1, 10, 10))
    )
    alphas: List[float] = field(
        default_factory=lambda: list(np.linspace(0, 4 * np.pi, 20))
    )
    N_list: List[int] = field(default_factory=lambda: [100, 1000, 10000])
    p_F: float = 1.0
    samples: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("gamma", "beta", "S", "alpha", "p_F"):
            setattr(self, name, _real(name, getattr(self, name)))
        for name in ("epsilons", "omegas", "gammas", "alphas"):
            setattr(self, name, _reals(name, getattr(self, name)))
        self.N_list = [_count("N_list", n, 1) for n in _reals("N_list", self.N_list)]
        self.samples = _count("samples", self.samples, 1)
        self.seed = _count("seed", self.seed, 0)


def fidelity_table(experiment: WireExperiment) -> pd.DataFrame:
    rows = []
    for omega in experiment.omegas:
        for gamma in experiment.gammas:
            simulated = simulate_psa_infidelity(omega, gamma, experiment.alphas)
            analytic = psa_fidelity_analytic(omega, gamma, experiment.alphas)
            for alpha, a, s in zip(
                experiment.alphas, np.atleast_1d(analytic), np.atleast_1d(simulated)
            ):
                rows.append(
                    dict(
                        omega=omega,
                        gamma=gamma,
                        alpha=alpha,
                        analytic=a,
                        simulated=s,
                        abs_error=abs(a - s),
                    )
                )
    return pd.DataFrame(rows)


def rates_table(experiment: WireExperiment) -> pd.DataFrame:
    rows = []
    for epsilon in experiment.epsilons:
        rows.append(
            dict(
                epsilon=epsilon,
                gamma=experiment.gamma,
                beta=experiment.beta,
                S=experiment.S,
                alpha=experiment.alpha,
                psa_critical_rate=psa_critical_rate(experiment.gamma, epsilon),
                psa_critical_rate_search=psa_critical_rate_search(
                    experiment.gamma, epsilon
                ),
                finite_T_sufficient_rate=finite_T_sufficient_rate(
                    epsilon, experiment.beta, experiment.S, experiment.alpha
                ),
            )
        )
    return pd.DataFrame(rows)
