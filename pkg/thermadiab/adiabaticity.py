"""Quasi-Gibbs reference states and the finite-temperature adiabatic bound.

The measured distance between the driven state and the quasi-Gibbs state
is compared against

    sqrt( sqrt(2) omega beta [ ||V_s||/mu_s
                               + int_0^s ||dV/ds'|| / mu ds'
                               + int_0^s nu ||V|| / mu ds'
                               + sqrt(2) int_0^s ||V||^2 / mu ds' ] )

on the common s-grid of the trajectory and the eigenbasis path.
"""
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from thermadiab.linalg import (
    DensityMatrix,
    DimensionMismatch,
    trace_distance,
    trace_distances,
)
from thermadiab.hamiltonian import (
    DrivenHamiltonian,
    DrivingSchedule,
    EigenbasisPath,
    SpectralFunctionals,
    VelocityProfile,
    boltzmann_weights,
    gibbs_state,
    spectral_functionals,
    trace_path,
    velocity_profile,
)
from thermadiab.hamiltonian.interface import check_beta
from thermadiab.evolution import TrajectoryRecord, propagate, STEP_GUARD, STEP_WARN
from thermadiab.utilities import ThermadiabError

BOUND_TOLERANCE = 1e-8
REPORT_COLUMNS = [
    "s",
    "term_boundary",
    "term_accel",
    "term_gapdrift",
    "term_quadratic",
    "rhs_total",
    "lhs_measured",
]


class BoundViolation(ThermadiabError):
    pass


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Per grid point terms of the adiabatic bound and the measured distance."""

    s_values: np.ndarray
    term_boundary: np.ndarray
    term_accel: np.ndarray
    term_gapdrift: np.ndarray
    term_quadratic: np.ndarray
    rhs_total: np.ndarray
    omega: float
    beta: float
    lhs_measured: Optional[np.ndarray] = None

    @property
    def bracket(self) -> np.ndarray:
        return (
            self.term_boundary
            + self.term_accel
            + self.term_gapdrift
            + self.term_quadratic
        )

    @property
    def margin(self) -> np.ndarray:
        if self.lhs_measured is None:
            raise ValueError("report has no measured distances yet")
        return self.rhs_total - self.lhs_measured

    @property
    def max_margin(self) -> float:
        return float(np.max(self.margin))

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margin))

    def to_frame(self) -> pd.DataFrame:
        lhs = self.lhs_measured
        if lhs is None:
            lhs = np.full(len(self.s_values), np.nan)
        return pd.DataFrame(
            dict(
                zip(
                    REPORT_COLUMNS,
                    [
                        self.s_values,
                        self.term_boundary,
                        self.term_accel,
                        self.term_gapdrift,
                        self.term_quadratic,
                        self.rhs_total,
                        lhs,
                    ],
                )
            )
        )


def export_report(report: BoundReport, path: Union[str, Path], float_format="%.17g"):
    report.to_frame().to_csv(path, index=False, float_format=float_format)


def quasi_gibbs_states(path: EigenbasisPath, beta: float) -> np.ndarray:
    """All quasi-Gibbs states along the path, shape (n, d, d)."""
    if check_beta(beta) == 0:
        identity = np.eye(path.dim, dtype=complex) / path.dim
        return np.broadcast_to(identity, (path.n_points, path.dim, path.dim)).copy()
    weights = boltzmann_weights(path.energies[0], beta)
    vectors = np.asarray(path.vectors)
    return np.einsum("kin,n,kjn->kij", vectors, weights, vectors.conj())


def quasi_gibbs(path: EigenbasisPath, k: int, beta: float) -> DensityMatrix:
    """Frozen initial Boltzmann weights on the matched eigenvectors at s_k."""
    if check_beta(beta) == 0:
        return DensityMatrix(np.eye(path.dim, dtype=complex) / path.dim)
    weights = boltzmann_weights(path.energies[0], beta)
    vectors = path.vectors[k]
    return DensityMatrix((vectors * weights) @ vectors.conj().T)


def instantaneous_gibbs(
    family: DrivenHamiltonian, s: float, beta: float
) -> DensityMatrix:
    return gibbs_state(family.matrix(s), beta)


def quasi_instantaneous_distance(path: EigenbasisPath, k: int, beta: float) -> float:
    """How far the quasi-Gibbs state is from the instantaneous Gibbs state."""
    return trace_distance(
        quasi_gibbs(path, k, beta),
        instantaneous_gibbs(path.family, path.grid[k], beta),
    )


def bound_general(
    path: EigenbasisPath,
    functionals: SpectralFunctionals,
    velocities: VelocityProfile,
    omega: float,
    beta: float,
) -> BoundReport:
    """Right-hand side of the adiabatic bound with per-term diagnostics.

    The three integrals use cumulative trapezoidal quadrature on the path grid.
    """
    beta = check_beta(beta)
    grid = path.grid
    if not (len(functionals.grid) == len(velocities.grid) == len(grid)):
        raise DimensionMismatch("path, functionals and velocities need one common grid")

    mu_inv = functionals.mu_inv
    v_norm = velocities.velocity_norms
    dv_norm = velocities.acceleration_norms

    boundary = mu_inv * v_norm
    accel = cumulative_trapezoid(mu_inv * dv_norm, grid, initial=0.0)
    gapdrift = cumulative_trapezoid(functionals.nu * mu_inv * v_norm, grid, initial=0.0)
    quadratic = np.sqrt(2) * cumulative_trapezoid(mu_inv * v_norm**2, grid, initial=0.0)

    bracket = boundary + accel + gapdrift + quadratic
    rhs = np.sqrt(np.sqrt(2) * omega * beta * bracket)
    return BoundReport(
        grid, boundary, accel, gapdrift, quadratic, rhs, float(omega), beta
    )


def bound_corollary(omega, beta, v_norm, s):
    """Closed form of the bound for uniform isospectral driving."""
    return np.sqrt(np.sqrt(2) * omega * beta * v_norm * (1 + np.sqrt(2) * s * v_norm))


def adiabatic_audit(
    traj: TrajectoryRecord,
    path: EigenbasisPath,
    beta: float,
    report: BoundReport,
    tolerance: float = BOUND_TOLERANCE,
) -> BoundReport:
    """Fill in the measured trace distances to the quasi-Gibbs states and
    assert they never exceed the bound.
    """
    if not (len(traj.s_values) == path.n_points == len(report.s_values)):
        raise DimensionMismatch("trajectory, path and report need one common grid")
    references = quasi_gibbs_states(path, beta)
    lhs = trace_distances(traj.states, references)
    audited = replace(report, lhs_measured=lhs)
    excess = lhs - (report.rhs_total + tolerance)
    if np.any(excess > 0):
        k = int(np.argmax(excess))
        raise BoundViolation(
            f"distance {lhs[k]:.6e} exceeds bound {report.rhs_total[k]:.6e}"
            f" at s = {path.grid[k]:.6g}"
        )
    return audited


@dataclass(frozen=True, eq=False)
class AuditResult:
    trajectory: TrajectoryRecord
    path: EigenbasisPath
    functionals: SpectralFunctionals
    velocities: VelocityProfile
    report: BoundReport


def audit_drive(
    family: DrivenHamiltonian,
    schedule: DrivingSchedule,
    beta: float,
    degeneracy_threshold: Optional[float] = None,
    fd_step: float = 0.0,
    tolerance: float = BOUND_TOLERANCE,
    step_guard: float = STEP_GUARD,
    step_warn: float = STEP_WARN,
) -> AuditResult:
    """Propagate, trace the eigenbasis, evaluate and check the bound."""
    trajectory = propagate(
        family, schedule, beta, step_guard=step_guard, step_warn=step_warn
    )
    path = trace_path(family, schedule, degeneracy_threshold)
    functionals = spectral_functionals(path)
    velocities = velocity_profile(path, fd_step)
    report = bound_general(path, functionals, velocities, schedule.omega, beta)
    report = adiabatic_audit(trajectory, path, beta, report, tolerance)
    return AuditResult(trajectory, path, functionals, velocities, report)
