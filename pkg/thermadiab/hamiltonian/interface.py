from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from thermadiab.linalg import (
    HermitianOperator,
    NonHermitianInput,
    DimensionMismatch,
    as_hermitian,
)
from thermadiab.utilities import ThermadiabError


class EvaluationFailure(ThermadiabError):
    pass


class DegenerateGap(ThermadiabError):
    pass


class ContinuityLoss(ThermadiabError):
    pass


class GridTooCoarse(ThermadiabError):
    pass


class UnorderedSpectrum(ThermadiabError):
    pass


class NonFiniteBeta(ThermadiabError):
    pass


class InvalidSchedule(ThermadiabError):
    pass


def check_beta(beta):
    """Inverse temperatures must be finite and non-negative."""
    if not np.isfinite(beta) or beta < 0:
        raise NonFiniteBeta(f"inverse temperature must be finite and >= 0, got {beta}")
    return float(beta)


@dataclass(frozen=True)
class DrivingSchedule:
    """Linear driving s = omega * t sampled on a uniform grid of
    ``n_steps`` points between 0 and ``s_max``.
    """

    omega: float
    s_max: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise InvalidSchedule(f"omega must be finite and > 0, got {self.omega}")
        if not (np.isfinite(self.s_max) and self.s_max > 0):
            raise InvalidSchedule(f"s_max must be finite and > 0, got {self.s_max}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise InvalidSchedule(
                f"n_steps must be an integer >= 2, got {self.n_steps}"
            )
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.s_max, self.n_steps)

    @property
    def ds(self) -> float:
        return self.s_max / (self.n_steps - 1)

    @property
    def dt(self) -> float:
        return self.ds / self.omega

    @property
    def times(self) -> np.ndarray:
        return self.grid / self.omega

    @property
    def t_final(self) -> float:
        return self.s_max / self.omega


class DrivenHamiltonian(ABC):
    """A family s -> H_s of Hermitian matrices of fixed dimension."""

    #: stored gauge velocity for families where it is known in closed form
    analytic_velocity: Optional[np.ndarray] = None
    #: True if the eigenvalues of H_s do not depend on s
    is_isospectral: bool = False

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def _matrix(self, s: float) -> np.ndarray:
        pass

    def matrix(self, s: float) -> np.ndarray:
        """H_s as a validated complex array."""
        h = np.asarray(self._matrix(float(s)), dtype=complex)
        if h.shape != (self.dim, self.dim):
            raise EvaluationFailure(
                f"H({s}) has shape {h.shape}, expected {(self.dim, self.dim)}"
            )
        try:
            return as_hermitian(h)
        except (NonHermitianInput, DimensionMismatch) as e:
            raise EvaluationFailure(f"H({s}) is not Hermitian: {e}") from e

    def evaluate(self, s: float) -> HermitianOperator:
        return HermitianOperator(self.matrix(s))

    def spectral_range(self) -> float:
        eigenvalues = np.linalg.eigvalsh(self.matrix(0.0))
        return float(eigenvalues[-1] - eigenvalues[0])
