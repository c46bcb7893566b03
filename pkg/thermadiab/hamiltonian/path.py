"""Continuity-tracked eigensystems along the driving parameter, the
transport unitary U_s and the gauge velocity V_s = -i U_s^dagger dU_s/ds.
"""
from dataclasses import dataclass
from typing import Optional, Tuple
import warnings

import numpy as np
from scipy import linalg as sla
from scipy.optimize import linear_sum_assignment

from thermadiab.linalg import (
    HermitianOperator,
    eig_hermitian,
    hermitianize,
    operator_norms,
    unitary_generator,
)
from thermadiab.hamiltonian.interface import (
    DrivenHamiltonian,
    DrivingSchedule,
    DegenerateGap,
    ContinuityLoss,
    GridTooCoarse,
)
from thermadiab.utilities import AccuracyWarning

DEFAULT_DEGENERACY_REL = 1e-8
CONTINUITY_MIN_OVERLAP = 0.5
MAX_STEP_ROTATION = np.pi / 2

# (offsets, weights) of second-order one-sided and central stencils
# for a function sampled at s_k + j*h with f(s_k) = 0
_CENTRAL = ((1, -1), (0.5, -0.5))
_FORWARD = ((1, 2), (2.0, -0.5))
_BACKWARD = ((-1, -2), (-2.0, 0.5))
_FORWARD_FIRST_ORDER = ((1,), (1.0,))
_BACKWARD_FIRST_ORDER = ((-1,), (-1.0,))


@dataclass(frozen=True, eq=False)
class EigenbasisPath:
    """Eigenvalues and continuity-matched eigenvectors of a family on a grid.

    ``energies[k, n]`` and ``vectors[k, :, n]`` carry the adiabatic label n
    fixed at s = 0 by ascending energy.
    """

    family: DrivenHamiltonian
    grid: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    degeneracy_threshold: float

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.energies, axis=1)

    @property
    def n_points(self) -> int:
        return len(self.grid)

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    @property
    def ds(self) -> float:
        return float(self.grid[1] - self.grid[0])


def default_degeneracy_threshold(family: DrivenHamiltonian, rel=DEFAULT_DEGENERACY_REL):
    spectral_range = family.spectral_range()
    return rel * (spectral_range if spectral_range > 0 else 1.0)


def _check_gaps(energies, threshold, s):
    gaps = np.diff(energies)
    if gaps.size and gaps.min() < threshold:
        n = int(np.argmin(gaps))
        raise DegenerateGap(
            f"gap between levels {n} and {n + 1} is {gaps[n]:.3e} at s = {s:.6g}"
            f" (threshold {threshold:.3e})"
        )


def match_frame(
    reference: np.ndarray, h: np.ndarray, s: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonalize h and order/phase its eigenvectors to follow the
    columns of ``reference`` by maximal overlap.
    """
    eigenvalues, eigenvectors = sla.eigh(h)
    overlaps = reference.conj().T @ eigenvectors
    rows, cols = linear_sum_assignment(-np.abs(overlaps))
    matched = overlaps[rows, cols]
    if np.min(np.abs(matched)) < CONTINUITY_MIN_OVERLAP:
        n = int(np.argmin(np.abs(matched)))
        raise ContinuityLoss(
            f"level {n} has overlap {abs(matched[n]):.3f} with its predecessor"
            f" at s = {s:.6g}; refine the grid"
        )
    # make every overlap with the reference real and positive
    phases = matched / np.abs(matched)
    return eigenvalues[cols], eigenvectors[:, cols] * phases.conj()[np.newaxis, :]


def trace_path(
    family: DrivenHamiltonian,
    schedule: DrivingSchedule,
    degeneracy_threshold: Optional[float] = None,
) -> EigenbasisPath:
    """Follow the eigenvectors of ``family`` along the schedule grid.

    Labels are fixed at s = 0 and never re-sorted afterwards; a label pair
    whose adjacent gap drops below ``degeneracy_threshold`` (including a
    crossing, which shows up as a negative gap) raises DegenerateGap.
    """
    if degeneracy_threshold is None:
        degeneracy_threshold = default_degeneracy_threshold(family)
    grid = schedule.grid
    energies = np.empty((len(grid), family.dim))
    vectors = np.empty((len(grid), family.dim, family.dim), dtype=complex)

    start = eig_hermitian(family.matrix(grid[0]))
    energies[0], vectors[0] = start.eigenvalues, start.eigenvectors
    _check_gaps(energies[0], degeneracy_threshold, grid[0])

    for k in range(1, len(grid)):
        energies[k], vectors[k] = match_frame(
            vectors[k - 1], family.matrix(grid[k]), grid[k]
        )
        _check_gaps(energies[k], degeneracy_threshold, grid[k])

    for array in (energies, vectors, grid):
        array.setflags(write=False)
    return EigenbasisPath(family, grid, energies, vectors, float(degeneracy_threshold))


def _check_index(path: EigenbasisPath, k: int) -> int:
    if not -path.n_points <= k < path.n_points:
        raise IndexError(f"grid index {k} out of range for {path.n_points} points")
    return k % path.n_points


def transport_unitary(path: EigenbasisPath, k: int) -> np.ndarray:
    """U_{s_k} = sum_n |Phi_{s_k}^n><Phi_0^n|"""
    k = _check_index(path, k)
    return path.vectors[k] @ path.vectors[0].conj().T


def auxiliary_hamiltonian(path: EigenbasisPath, k: int) -> HermitianOperator:
    """U^dagger H_s U, diagonal in the s = 0 eigenbasis with matched energies."""
    k = _check_index(path, k)
    frame = path.vectors[0]
    return HermitianOperator((frame * path.energies[k]) @ frame.conj().T)


def _stencil(k, n_points):
    if n_points == 2:
        return _FORWARD_FIRST_ORDER if k == 0 else _BACKWARD_FIRST_ORDER
    if k == 0:
        return _FORWARD
    if k == n_points - 1:
        return _BACKWARD
    return _CENTRAL


def _local_frame(path: EigenbasisPath, k: int, offset: float) -> np.ndarray:
    s = path.grid[k] + offset
    return match_frame(path.vectors[k], path.family.matrix(s), s)[1]


def _local_stencil(path: EigenbasisPath, k: int, fd_step: float):
    # one-sided stencils keep the evaluation inside [0, s_max]
    s, s_max = path.grid[k], path.grid[-1]
    if s - fd_step < 0:
        return _FORWARD
    if s + fd_step > s_max:
        return _BACKWARD
    return _CENTRAL


def gauge_velocity(
    path: EigenbasisPath, k: int, fd_step: float = 0.0
) -> HermitianOperator:
    """V_{s_k} = -i U^dagger dU/ds.

    Families that know their gauge velocity in closed form return it
    directly. Otherwise, with X_j = Phi_k^dagger Phi_{k+j} = exp(i f_j),
    the derivative of f at j = 0 is taken by a second-order stencil and
    mapped back to the s = 0 eigenbasis. ``fd_step = 0`` differences on the
    path grid, a positive value uses frames of the family evaluated at
    s_k +- fd_step.
    """
    k = _check_index(path, k)
    if path.family.analytic_velocity is not None:
        return HermitianOperator(path.family.analytic_velocity)

    if fd_step and fd_step > 0:
        offsets, weights = _local_stencil(path, k, fd_step)
        h = fd_step
        frames = [_local_frame(path, k, j * h) for j in offsets]
    else:
        offsets, weights = _stencil(k, path.n_points)
        h = path.ds
        frames = [path.vectors[k + j] for j in offsets]

    derivative = np.zeros((path.dim, path.dim), dtype=complex)
    for frame, weight in zip(frames, weights):
        generator, angle = unitary_generator(path.vectors[k].conj().T @ frame)
        if angle >= MAX_STEP_ROTATION:
            raise GridTooCoarse(
                f"eigenframe rotates by {angle:.3f} rad per step at s = {path.grid[k]:.6g}"
            )
        derivative += weight * generator
    derivative /= h

    start = path.vectors[0]
    velocity = start @ derivative @ start.conj().T
    return HermitianOperator(hermitianize(velocity))


def _derivative_along_grid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    edge_order = 2 if len(grid) >= 3 else 1
    return np.gradient(values, grid, axis=0, edge_order=edge_order)


def gauge_acceleration(
    path: EigenbasisPath, k: int, fd_step: float = 0.0
) -> HermitianOperator:
    """dV/ds at s_k, by differencing gauge_velocity along the grid."""
    k = _check_index(path, k)
    if path.family.analytic_velocity is not None:
        return HermitianOperator(np.zeros((path.dim, path.dim), dtype=complex))
    n = path.n_points
    window = np.arange(max(0, k - 2), min(n, k + 3))
    velocities = np.array([gauge_velocity(path, j, fd_step).entries for j in window])
    derivative = _derivative_along_grid(velocities, path.grid[window])
    return HermitianOperator(derivative[k - window[0]])


@dataclass(frozen=True, eq=False)
class VelocityProfile:
    """Gauge velocity and its derivative on every grid point."""

    grid: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    @property
    def velocity_norms(self) -> np.ndarray:
        return operator_norms(self.velocities)

    @property
    def acceleration_norms(self) -> np.ndarray:
        return operator_norms(self.accelerations)


def velocity_profile(path: EigenbasisPath, fd_step: float = 0.0) -> VelocityProfile:
    n, d = path.n_points, path.dim
    if path.family.analytic_velocity is not None:
        velocities = np.broadcast_to(path.family.analytic_velocity, (n, d, d)).copy()
        accelerations = np.zeros((n, d, d), dtype=complex)
    else:
        velocities = np.array(
            [gauge_velocity(path, k, fd_step).entries for k in range(n)]
        )
        accelerations = _derivative_along_grid(velocities, path.grid)
        if n < 3:
            warnings.warn(
                "gauge acceleration from a two-point grid is first order only",
                AccuracyWarning,
            )
    return VelocityProfile(path.grid, velocities, accelerations)
