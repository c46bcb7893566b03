"""Spectrum-preserving propagation of the von Neumann equation
i d(rho)/dt = [H_{omega t}, rho] starting from a thermal state.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union
import warnings

import numpy as np
import pandas as pd
from scipy import linalg as sla

from thermadiab.linalg import (
    DensityMatrix,
    as_hermitian,
    hermitianize,
    propagator_step,
    purity,
    spectral_exponential,
)
from thermadiab.hamiltonian import DrivenHamiltonian, DrivingSchedule, gibbs_state
from thermadiab.hamiltonian.interface import check_beta
from thermadiab.utilities import ThermadiabError, AccuracyWarning

STEP_GUARD = 1.0
STEP_WARN = 0.5


class StepTooLarge(ThermadiabError):
    pass


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    times: np.ndarray
    s_values: np.ndarray
    states: np.ndarray
    initial_spectrum: np.ndarray

    def state(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.states[k])

    @property
    def final_state(self) -> DensityMatrix:
        return self.state(-1)

    @property
    def purities(self) -> np.ndarray:
        return np.array([purity(rho) for rho in self.states])

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def propagate(
    family: DrivenHamiltonian,
    schedule: DrivingSchedule,
    beta: float,
    initial_state=None,
    step_guard: float = STEP_GUARD,
    step_warn: float = STEP_WARN,
) -> TrajectoryRecord:
    """Midpoint-exponential stepping rho -> W rho W^dagger with
    W_k = exp(-i H_{s_k + ds/2} dt).

    Parameters
    ----------
    family : DrivenHamiltonian
    schedule : DrivingSchedule
        The time grid is the s-grid divided by omega.
    beta : float
        Inverse temperature of the initial Gibbs state of H_0.
    initial_state : array, optional
        Replaces the Gibbs state, e.g. for pure-state checks.
    step_guard : float
        Largest allowed ||H|| dt; StepTooLarge beyond it.
    step_warn : float
        ||H|| dt above which an AccuracyWarning is issued.

    Returns
    -------
    TrajectoryRecord

    """
    beta = check_beta(beta)
    grid = schedule.grid
    dt = schedule.dt
    if initial_state is None:
        rho = gibbs_state(family.matrix(0.0), beta).entries.copy()
    else:
        rho = np.array(DensityMatrix(initial_state).entries)

    states = np.empty((len(grid), family.dim, family.dim), dtype=complex)
    states[0] = rho
    initial_spectrum = np.linalg.eigvalsh(rho)

    # the maximally mixed state commutes with every H_s, only the grid is checked
    maximally_mixed = initial_state is None and beta == 0
    warned = False
    for k in range(len(grid) - 1):
        s_mid = 0.5 * (grid[k] + grid[k + 1])
        energies, vectors = sla.eigh(family.matrix(s_mid))
        size = np.max(np.abs(energies)) * dt
        if size > step_guard:
            raise StepTooLarge(
                f"||H|| dt = {size:.3g} exceeds {step_guard:g} at s = {s_mid:.6g};"
                " use more steps"
            )
        if size > step_warn and not warned:
            warnings.warn(f"||H|| dt = {size:.3g} at s = {s_mid:.6g}", AccuracyWarning)
            warned = True
        if not maximally_mixed:
            w = spectral_exponential(energies, vectors, dt)
            rho = hermitianize(w @ rho @ w.conj().T)
        states[k + 1] = rho

    states.setflags(write=False)
    return TrajectoryRecord(schedule.times, grid, states, initial_spectrum)


def verify_spectrum_conservation(traj: TrajectoryRecord) -> float:
    """Largest deviation of any state spectrum from the initial one."""
    spectra = np.linalg.eigvalsh(hermitianize(np.asarray(traj.states)))
    return float(np.max(np.abs(spectra - traj.initial_spectrum[np.newaxis, :])))


def rotating_frame_propagator(h0, v, omega: float, t: float) -> np.ndarray:
    """Exact evolution operator of H_s = exp(isV) H0 exp(-isV), s = omega t:
    exp(i omega t V) exp(-i (H0 + omega V) t).
    """
    h0, v = as_hermitian(h0), as_hermitian(v)
    return propagator_step(v, -omega * t) @ propagator_step(h0 + omega * v, t)


def trajectory_frame(
    traj: TrajectoryRecord, include_states: bool = False
) -> pd.DataFrame:
    columns = dict(t=traj.times, s=traj.s_values, purity=traj.purities)
    if include_states:
        d = traj.dim
        for i in range(d):
            for j in range(d):
                columns[f"re_{i}_{j}"] = traj.states[:, i, j].real
                columns[f"im_{i}_{j}"] = traj.states[:, i, j].imag
    return pd.DataFrame(columns)


def export_trajectory(
    traj: TrajectoryRecord,
    path: Union[str, Path],
    include_states: bool = False,
    float_format: str = "%.17g",
):
    trajectory_frame(traj, include_states).to_csv(
        path, index=False, float_format=float_format
    )


def dump_states(
    traj: TrajectoryRecord, path: Union[str, Path], metadata: Optional[dict] = None
):
    """Save the full state array to an hdf5 file."""
    import flammkuchen as fl

    fl.save(
        str(path),
        dict(
            times=np.asarray(traj.times),
            s_values=np.asarray(traj.s_values),
            states=np.array(traj.states),
            initial_spectrum=np.asarray(traj.initial_spectrum),
            metadata=metadata or {},
        ),
    )
