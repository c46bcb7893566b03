import flammkuchen as fl
import numpy as np
import pandas as pd
import pytest

from thermadiab.evolution import (
    StepTooLarge,
    TrajectoryRecord,
    dump_states,
    export_trajectory,
    propagate,
    rotating_frame_propagator,
    verify_spectrum_conservation,
)
from thermadiab.hamiltonian import DrivingSchedule, UniformIsospectral, constant_family, gibbs_state
from thermadiab.linalg import trace_distance
from thermadiab.utilities import AccuracyWarning
from thermadiab.wire_model import wire_family
from tests.helpers import random_hermitian, random_state


def _random_drive(rng, dim=3, v_norm=1.0):
    return UniformIsospectral(random_hermitian(rng, dim), random_hermitian(rng, dim, v_norm))


def test_infinite_temperature_state_is_frozen_exactly(rng):
    traj = propagate(_random_drive(rng, 4), DrivingSchedule(0.3, 2.0, 101), beta=0.0)
    for state in traj.states:
        np.testing.assert_array_equal(state, np.eye(4) / 4)


def test_constant_family_keeps_the_gibbs_state(rng):
    family = constant_family(random_hermitian(rng, 4))
    traj = propagate(family, DrivingSchedule(0.1, 1.0, 101), beta=1.5)
    np.testing.assert_allclose(traj.states[0], gibbs_state(family.matrix(0), 1.5).entries)
    for state in traj.states:
        np.testing.assert_allclose(state, traj.states[0], atol=1e-10)


def test_commuting_drive_keeps_the_initial_state():
    family = UniformIsospectral(np.diag([0.0, 1.0, 2.0]), np.diag([0.3, -0.2, 1.0]))
    traj = propagate(family, DrivingSchedule(0.05, 3.0, 301), beta=2.0)
    for state in traj.states:
        np.testing.assert_allclose(state, traj.states[0], atol=1e-10)


def test_wire_matches_rotating_frame_solution():
    gamma = omega = 1.0
    family = wire_family(gamma)
    schedule = DrivingSchedule(omega, np.pi, 40001)
    traj = propagate(family, schedule, beta=1.0)
    rho0 = traj.states[0]
    for k in [10000, 25000, 40000]:
        u = rotating_frame_propagator(family.h0, family.v, omega, traj.times[k])
        np.testing.assert_allclose(traj.states[k], u @ rho0 @ u.conj().T, atol=1e-8)


def test_rotating_frame_propagator_is_unitary(rng):
    h0, v = random_hermitian(rng, 3), random_hermitian(rng, 3)
    np.testing.assert_allclose(rotating_frame_propagator(h0, v, 0.4, 0.0), np.eye(3), atol=1e-14)
    u = rotating_frame_propagator(h0, v, 0.4, 2.5)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_spectrum_and_purity_are_conserved(rng):
    traj = propagate(_random_drive(rng, 4, 2.0), DrivingSchedule(0.2, 2.0, 401), beta=0.7)
    assert verify_spectrum_conservation(traj) < 1e-9
    np.testing.assert_allclose(traj.purities, traj.purities[0], atol=1e-9)
    np.testing.assert_allclose(traj.initial_spectrum, traj.final_state.spectrum, atol=1e-9)


def test_long_drive_does_not_accumulate_drift(rng):
    traj = propagate(_random_drive(rng, 6), DrivingSchedule(0.05, 2 * np.pi, 2001), beta=1.0)
    assert verify_spectrum_conservation(traj) < 1e-8


def test_depolarized_state_is_detected():
    rho0 = np.diag([0.7, 0.3]).astype(complex)
    damaged = 0.9 * rho0 + 0.1 * np.eye(2) / 2
    traj = TrajectoryRecord(
        np.array([0.0, 1.0]),
        np.array([0.0, 1.0]),
        np.array([rho0, damaged]),
        np.linalg.eigvalsh(rho0),
    )
    assert verify_spectrum_conservation(traj) == pytest.approx(0.02)


def test_pure_initial_state(rng):
    psi = np.array([1.0, 0.0, 0.0])
    traj = propagate(
        _random_drive(rng), DrivingSchedule(0.5, 1.0, 201), beta=0.0, initial_state=np.outer(psi, psi)
    )
    np.testing.assert_allclose(traj.purities, 1, atol=1e-10)
    assert trace_distance(traj.states[0], traj.states[-1]) > 1e-3


def test_step_halving_converges_at_second_order(rng):
    family = _random_drive(rng)

    def final_state(n_intervals):
        return propagate(family, DrivingSchedule(0.5, 1.0, n_intervals + 1), beta=1.0).states[-1]

    reference = final_state(1600)
    coarse = trace_distance(final_state(50), reference)
    fine = trace_distance(final_state(100), reference)
    assert coarse / fine >= 3


def test_step_guard(rng):
    family = constant_family(10 * random_hermitian(rng, 2))
    with pytest.raises(StepTooLarge):
        propagate(family, DrivingSchedule(0.01, 1.0, 3), beta=1.0)
    with pytest.warns(AccuracyWarning):
        # ||H|| dt = 0.7
        propagate(family, DrivingSchedule(1.0, 0.14, 3), beta=1.0)


def test_step_guard_at_infinite_temperature(rng):
    family = constant_family(10 * random_hermitian(rng, 2))
    with pytest.raises(StepTooLarge):
        propagate(family, DrivingSchedule(0.01, 1.0, 3), beta=0.0)
    with pytest.warns(AccuracyWarning):
        traj = propagate(family, DrivingSchedule(1.0, 0.14, 3), beta=0.0)
    for state in traj.states:
        np.testing.assert_array_equal(state, np.eye(2) / 2)


def test_states_are_read_only(rng):
    traj = propagate(_random_drive(rng), DrivingSchedule(1.0, 1.0, 5), beta=1.0)
    with pytest.raises(ValueError):
        traj.states[0, 0, 0] = 1
    assert traj.dim == 3
    assert traj.state(2).dim == 3


def test_export_trajectory(rng, temp_path):
    traj = propagate(_random_drive(rng), DrivingSchedule(0.5, 1.0, 11), beta=1.0)
    export_trajectory(traj, temp_path / "trajectory.csv")
    frame = pd.read_csv(temp_path / "trajectory.csv", float_precision="round_trip")
    assert list(frame.columns) == ["t", "s", "purity"]
    np.testing.assert_array_equal(frame["t"], traj.times)
    np.testing.assert_array_equal(frame["purity"], traj.purities)

    export_trajectory(traj, temp_path / "states.csv", include_states=True)
    frame = pd.read_csv(temp_path / "states.csv", float_precision="round_trip")
    assert len(frame.columns) == 3 + 2 * 9
    np.testing.assert_array_equal(frame["im_0_1"], traj.states[:, 0, 1].imag)


def test_dump_states(rng, temp_path):
    traj = propagate(_random_drive(rng), DrivingSchedule(0.5, 1.0, 11), beta=1.0)
    dump_states(traj, temp_path / "states.h5", dict(beta=1.0))
    loaded = fl.load(str(temp_path / "states.h5"))
    np.testing.assert_array_equal(loaded["states"], traj.states)
    assert loaded["metadata"]["beta"] == 1.0
