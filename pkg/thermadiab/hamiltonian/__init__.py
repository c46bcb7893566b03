from thermadiab.hamiltonian.interface import (
    DrivenHamiltonian,
    DrivingSchedule,
    EvaluationFailure,
    DegenerateGap,
    ContinuityLoss,
    GridTooCoarse,
    UnorderedSpectrum,
    NonFiniteBeta,
    InvalidSchedule,
)
from thermadiab.hamiltonian.families import (
    UniformIsospectral,
    DilatedIsospectral,
    Generic,
    LinearInterpolation,
    constant_family,
    spin_operators,
)
from thermadiab.hamiltonian.path import (
    EigenbasisPath,
    VelocityProfile,
    trace_path,
    transport_unitary,
    auxiliary_hamiltonian,
    gauge_velocity,
    gauge_acceleration,
    velocity_profile,
)
from thermadiab.hamiltonian.spectral import (
    SpectralFunctionals,
    spectral_functionals,
    all_pairs_oracle,
    adjacent_pair_functionals,
    lemma_discrepancy,
)
from thermadiab.hamiltonian.thermal import gibbs_state, boltzmann_weights


def evaluate(family: DrivenHamiltonian, s: float):
    return family.evaluate(s)


# Update this dictionary and add the import above when adding a new
# family that can be built from matrices in a scenario file
family_class_dict = dict(
    uniform_isospectral=UniformIsospectral,
    dilated_isospectral=DilatedIsospectral,
    linear_interpolation=LinearInterpolation,
)
