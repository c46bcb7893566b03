import numpy as np
import pytest

from thermadiab.hamiltonian import (
    ContinuityLoss,
    DegenerateGap,
    DilatedIsospectral,
    DrivingSchedule,
    EigenbasisPath,
    EvaluationFailure,
    Generic,
    GridTooCoarse,
    InvalidSchedule,
    LinearInterpolation,
    NonFiniteBeta,
    UniformIsospectral,
    UnorderedSpectrum,
    adjacent_pair_functionals,
    all_pairs_oracle,
    auxiliary_hamiltonian,
    boltzmann_weights,
    constant_family,
    evaluate,
    gauge_acceleration,
    gauge_velocity,
    gibbs_state,
    lemma_discrepancy,
    spectral_functionals,
    spin_operators,
    trace_path,
    transport_unitary,
    velocity_profile,
)
from thermadiab.linalg import operator_norm, propagator_step
from thermadiab.main import random_ordered_spectra
from thermadiab.wire_model import wire_family
from tests.helpers import random_hermitian

S_X, S_Y, S_Z = spin_operators(0.5)


def _zero_diagonal_drive():
    """Isospectral drive hidden behind a generic family, with a velocity
    that has no diagonal in the eigenbasis of H0."""
    h0 = np.diag([0.0, 1.0, 2.5])
    v = np.array([[0, 1, 1 + 0.5j], [1, 0, 1], [1 - 0.5j, 1, 0]])
    v = v / operator_norm(v)
    iso = UniformIsospectral(h0, v)
    return Generic(iso.matrix, 3), v


def _avoided_crossing(s, coupling=0.1):
    h = np.diag([-(s - 1), s - 1, 2.0, 3.0]).astype(complex)
    h[0, 1] = h[1, 0] = coupling
    return h


def test_spin_operators_commutation():
    for spin in [0.5, 1, 1.5]:
        s_x, s_y, s_z = spin_operators(spin)
        np.testing.assert_allclose(s_x @ s_y - s_y @ s_x, 1j * s_z, atol=1e-14)
        casimir = s_x @ s_x + s_y @ s_y + s_z @ s_z
        np.testing.assert_allclose(casimir, spin * (spin + 1) * np.eye(int(2 * spin + 1)))
    with pytest.raises(ValueError):
        spin_operators(0.7)


def test_schedule_grid_and_validation():
    schedule = DrivingSchedule(omega=0.5, s_max=2.0, n_steps=5)
    np.testing.assert_allclose(schedule.grid, [0, 0.5, 1, 1.5, 2])
    assert schedule.dt == pytest.approx(1.0)
    assert schedule.t_final == pytest.approx(4.0)
    for omega, s_max, n_steps in [(0, 1, 10), (1, -1, 10), (1, 1, 1), (np.nan, 1, 10)]:
        with pytest.raises(InvalidSchedule):
            DrivingSchedule(omega, s_max, n_steps)


def test_evaluate_isospectral_at_zero(rng):
    h0, v = random_hermitian(rng, 4), random_hermitian(rng, 4)
    family = UniformIsospectral(h0, v)
    np.testing.assert_allclose(evaluate(family, 0.0).entries, h0, atol=1e-12)
    s = 0.7
    u = propagator_step(v, -s)
    np.testing.assert_allclose(family.matrix(s), u @ h0 @ u.conj().T, atol=1e-12)


def test_evaluate_wire_rotates_the_field():
    family = wire_family(1.0)
    for alpha in [0.3, np.pi / 2, 2.0]:
        expected = -np.sin(alpha) * S_X + np.cos(alpha) * S_Y
        np.testing.assert_allclose(family.matrix(alpha), expected, atol=1e-14)


def test_evaluation_failures():
    with pytest.raises(EvaluationFailure):
        Generic(lambda s: np.array([[0, 1], [0, 0]]), 2).matrix(0.0)
    with pytest.raises(EvaluationFailure):
        Generic(lambda s: np.eye(3), 2).evaluate(0.0)


def test_dilated_and_interpolated_families(rng):
    h0 = np.diag([0.0, 1.0, 3.0])
    dilated = DilatedIsospectral(h0, random_hermitian(rng, 3), dilation=1.0)
    np.testing.assert_allclose(np.linalg.eigvalsh(dilated.matrix(1.0)), [0, 2, 6], atol=1e-12)
    a, b = np.diag([1.0, -1.0]), S_X
    family = LinearInterpolation(a, b, 2.0)
    np.testing.assert_allclose(family.matrix(1.0), (a + b) / 2)
    np.testing.assert_allclose(family.matrix(2.0), b)


def test_constant_path_has_identical_frames(rng):
    family = constant_family(random_hermitian(rng, 4))
    path = trace_path(family, DrivingSchedule(0.1, 1.0, 11))
    for k in range(path.n_points):
        np.testing.assert_allclose(path.vectors[k], path.vectors[0], atol=1e-12)
        np.testing.assert_allclose(path.energies[k], path.energies[0], atol=1e-12)
        np.testing.assert_allclose(transport_unitary(path, k), np.eye(4), atol=1e-12)
    assert not path.vectors.flags.writeable


def test_isospectral_transport_is_the_rotation(rng):
    h0, v = random_hermitian(rng, 4), random_hermitian(rng, 4)
    path = trace_path(UniformIsospectral(h0, v), DrivingSchedule(1.0, 2.0, 201))
    frame = path.vectors[0]
    np.testing.assert_allclose(transport_unitary(path, 0), np.eye(4), atol=1e-12)
    for k in [50, 200]:
        rotation = propagator_step(v, -path.grid[k])
        overlaps = frame.conj().T @ transport_unitary(path, k).conj().T @ rotation @ frame
        np.testing.assert_allclose(np.abs(np.diag(overlaps)), 1, atol=1e-8)


def test_path_vectors_stay_unitary_and_continuous(rng):
    family = UniformIsospectral(random_hermitian(rng, 5), random_hermitian(rng, 5, norm=2))
    path = trace_path(family, DrivingSchedule(1.0, 1.0, 101))
    for k in range(path.n_points):
        u = path.vectors[k]
        np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-10)
    overlaps = np.abs(np.einsum("kin,kin->kn", path.vectors[:-1].conj(), path.vectors[1:]))
    assert overlaps.min() > 0.5


def test_reconstruction_along_the_path(rng):
    families = [
        wire_family(0.7),
        DilatedIsospectral(random_hermitian(rng, 3), random_hermitian(rng, 3), 0.5),
        Generic(_avoided_crossing, 4),
    ]
    for family in families:
        path = trace_path(family, DrivingSchedule(1.0, 2.0, 81))
        for k in range(0, path.n_points, 10):
            u = transport_unitary(path, k)
            rebuilt = u @ auxiliary_hamiltonian(path, k).entries @ u.conj().T
            np.testing.assert_allclose(rebuilt, family.matrix(path.grid[k]), atol=1e-8)


def test_avoided_crossing_keeps_adiabatic_labels():
    family = Generic(_avoided_crossing, 4)
    coarse = trace_path(family, DrivingSchedule(1.0, 2.0, 41))
    fine = trace_path(family, DrivingSchedule(1.0, 2.0, 401))
    np.testing.assert_allclose(coarse.energies, fine.energies[::10], atol=1e-12)
    overlaps = np.einsum("kin,kin->kn", coarse.vectors.conj(), fine.vectors[::10])
    np.testing.assert_allclose(np.abs(overlaps), 1, atol=1e-10)
    # the ground state starts on level 1 and ends on level 0
    assert abs(coarse.vectors[0][1, 0]) > 0.99
    assert abs(coarse.vectors[-1][0, 0]) > 0.99
    assert coarse.gaps[:, 0].min() == pytest.approx(0.2)


def test_true_crossing_is_rejected():
    family = Generic(lambda s: np.diag([s - 1, 1 - s]), 2)
    with pytest.raises(DegenerateGap):
        trace_path(family, DrivingSchedule(1.0, 2.0, 41))
    with pytest.raises(DegenerateGap):
        trace_path(family, DrivingSchedule(1.0, 2.0, 40))


def test_degenerate_start_is_rejected():
    with pytest.raises(DegenerateGap):
        trace_path(constant_family(np.diag([0.0, 1.0, 1.0])), DrivingSchedule(1.0, 1.0, 3))


def test_sudden_basis_change_loses_continuity():
    dim = 5
    fourier = np.exp(2j * np.pi * np.outer(np.arange(dim), np.arange(dim)) / dim) / np.sqrt(dim)
    energies = np.diag(np.arange(dim, dtype=float))

    def jump(s):
        return energies if s < 0.5 else fourier @ energies @ fourier.conj().T

    with pytest.raises(ContinuityLoss):
        trace_path(Generic(jump, dim), DrivingSchedule(1.0, 1.0, 3))


def test_gauge_velocity_of_the_wire_is_minus_sz():
    path = trace_path(wire_family(0.01), DrivingSchedule(0.01, np.pi, 51))
    for k in [0, 25, 50]:
        np.testing.assert_allclose(gauge_velocity(path, k).entries, -S_Z, atol=1e-14)
        np.testing.assert_allclose(gauge_acceleration(path, k).entries, 0)


def test_constant_family_has_no_velocity(rng):
    path = trace_path(constant_family(random_hermitian(rng, 3)), DrivingSchedule(1.0, 1.0, 5))
    profile = velocity_profile(path)
    np.testing.assert_allclose(profile.velocity_norms, 0)
    np.testing.assert_allclose(profile.acceleration_norms, 0)


def test_finite_difference_velocity_converges():
    family, v = _zero_diagonal_drive()
    errors = []
    for n_steps in [21, 41]:
        path = trace_path(family, DrivingSchedule(1.0, 1.0, n_steps))
        k = (n_steps - 1) // 2
        velocity = gauge_velocity(path, k).entries
        np.testing.assert_allclose(velocity, velocity.conj().T, atol=1e-8)
        errors.append(operator_norm(velocity - v))
    assert errors[1] < 1e-3
    assert 3.2 < errors[0] / errors[1] < 4.8


def test_velocity_rejects_frames_rotating_too_far_per_step():
    family = Generic(wire_family(1.0).matrix, 2)
    pauli_y = np.array([[0, -1j], [1j, 0]])
    # eigenframe rotation angle 2.0 between neighbours
    vectors = np.array([propagator_step(pauli_y, -2.0 * k) for k in range(3)])
    energies = np.tile([-0.5, 0.5], (3, 1))
    path = EigenbasisPath(family, np.array([0.0, 0.1, 0.2]), energies, vectors, 1e-8)
    for k in range(3):
        with pytest.raises(GridTooCoarse):
            gauge_velocity(path, k)


def test_local_difference_velocity_converges():
    family, v = _zero_diagonal_drive()
    path = trace_path(family, DrivingSchedule(1.0, 1.0, 2001))
    errors = [
        operator_norm(gauge_velocity(path, 1000, fd_step=h).entries - v)
        for h in [0.1, 0.05, 0.025]
    ]
    assert 3.2 < errors[0] / errors[1] < 4.8
    assert 3.2 < errors[1] / errors[2] < 4.8


def test_generic_velocity_matches_analytic_everywhere():
    family, v = _zero_diagonal_drive()
    path = trace_path(family, DrivingSchedule(1.0, 1.0, 401))
    profile = velocity_profile(path)
    for velocity in profile.velocities:
        assert operator_norm(velocity - v) < 1e-4
    assert profile.acceleration_norms.max() < 1e-4
    assert operator_norm(gauge_acceleration(path, 200).entries) < 1e-4


def test_isospectral_functionals_are_trivial(rng):
    for family in [
        UniformIsospectral(random_hermitian(rng, 4), random_hermitian(rng, 4)),
        wire_family(2.0),
    ]:
        functionals = spectral_functionals(trace_path(family, DrivingSchedule(1.0, 3.0, 31)))
        np.testing.assert_allclose(functionals.mu, 1, atol=1e-10)
        np.testing.assert_allclose(functionals.nu, 0, atol=1e-10)


def test_dilated_functionals(rng):
    family = DilatedIsospectral(np.diag([0.0, 1.0, 1.5, 4.0]), random_hermitian(rng, 4), 1.0)
    path = trace_path(family, DrivingSchedule(1.0, 2.0, 101))
    functionals = spectral_functionals(path)
    expected = 1 / (1 + path.grid)
    np.testing.assert_allclose(functionals.mu_inv, expected, rtol=1e-9)
    np.testing.assert_allclose(functionals.nu, expected, rtol=1e-8)


def test_all_pairs_oracle_trivial_cases():
    es = np.array([-1.0, 0.5, 2.0])
    assert all_pairs_oracle(es, es, np.zeros(3)) == (pytest.approx(1.0), 0.0)
    e0, es, des = [0.0, 2.0], [1.0, 1.5], [0.3, -0.2]
    mu_inv, nu = all_pairs_oracle(e0, es, des)
    adjacent = adjacent_pair_functionals(np.diff(e0), np.diff(es), np.diff(des))
    assert mu_inv == pytest.approx(4.0)
    assert (mu_inv, nu) == (pytest.approx(adjacent[0]), pytest.approx(adjacent[1]))
    with pytest.raises(UnorderedSpectrum):
        all_pairs_oracle([0, 1], [1.0, 0.0], [0, 0])


def test_adjacent_pairs_equal_all_pairs(rng):
    for trial in range(1000):
        e0, es, des = random_ordered_spectra(rng, 2 + trial % 9)
        assert lemma_discrepancy(e0, es, des) < 1e-12


def test_gibbs_state_examples():
    np.testing.assert_allclose(gibbs_state(S_Z, 0.0).entries, np.eye(2) / 2)
    energy = 2.0
    rho = gibbs_state(np.diag([0.0, energy]), np.log(3) / energy)
    np.testing.assert_allclose(rho.entries, np.diag([0.75, 0.25]), atol=1e-15)
    cold = gibbs_state(np.diag([0.0, 1.0]), 50.0)
    assert cold.entries[1, 1].real < 1e-20
    assert cold.entries[0, 0].real == pytest.approx(1.0)


def test_gibbs_state_rejects_bad_temperatures():
    for beta in [-1.0, np.inf, np.nan]:
        with pytest.raises(NonFiniteBeta):
            gibbs_state(S_Z, beta)


def test_boltzmann_weights_survive_large_energies():
    weights = boltzmann_weights([1000.0, 1001.0, 5000.0], 10.0)
    np.testing.assert_allclose(weights, [1 / (1 + np.exp(-10)), np.exp(-10) / (1 + np.exp(-10)), 0])
    np.testing.assert_allclose(boltzmann_weights([1.0, 2.0, 3.0, 4.0], 0), 0.25)
