"""Scenario files and the simulate pipeline behind the command line.

A scenario is a JSON object::

    {
        "family": {"variant": "uniform_isospectral",
                   "H0": [[[0, 0], [0, -0.5]], [[0, 0.5], [0, 0]]],
                   "V": [[[-0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]},
        "omega": 0.01, "beta": 1.0, "s_max": 3.14159, "n_steps": 2001
    }

with complex matrices given row-major as nested [re, im] pairs.
"""
from dataclasses import dataclass, replace, fields
import json
import numbers
from pathlib import Path
from typing import Optional

import numpy as np

from thermadiab.linalg import DimensionMismatch, NonHermitianInput
from thermadiab.hamiltonian import (
    DrivenHamiltonian,
    DrivingSchedule,
    constant_family,
    family_class_dict,
)
from thermadiab.hamiltonian.path import DEFAULT_DEGENERACY_REL
from thermadiab.adiabaticity import audit_drive, export_report, AuditResult
from thermadiab.evolution import (
    export_trajectory,
    dump_states,
    verify_spectrum_conservation,
)
from thermadiab.wire_model import (
    InvalidWireParameters,
    WireExperiment,
    WireModelParams,
    WireSpin,
)
from thermadiab.utilities import ThermadiabError, clean_json

SWEEP_AXES = ("omega", "beta", "n_steps")
TRAJECTORY_FILENAME = "trajectory.csv"
REPORT_FILENAME = "bound_report.csv"
SUMMARY_FILENAME = "summary.json"
STATES_FILENAME = "states.h5"


class ConfigParse(ThermadiabError):
    pass


class FileIO(ThermadiabError):
    pass


def parse_complex_matrix(data, name="matrix") -> np.ndarray:
    """Square complex matrix from nested [re, im] pairs."""
    try:
        array = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigParse(f"{name}: not a nested list of numbers ({e})") from e
    if array.ndim != 3 or array.shape[2] != 2 or array.shape[0] != array.shape[1]:
        raise ConfigParse(f"{name}: expected shape (d, d, 2), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ConfigParse(f"{name}: non-finite entries")
    return array[..., 0] + 1j * array[..., 1]


def encode_complex_matrix(matrix) -> list:
    matrix = np.asarray(matrix, dtype=complex)
    return np.stack([matrix.real, matrix.imag], axis=-1).tolist()


@dataclass
class FamilySpec:
    variant: str
    H0: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None
    dilation: float = 0.0
    dim: int = 4
    v_norm: float = 1.0
    wire: Optional[WireModelParams] = None

    def __post_init__(self):
        for name in ("dilation", "v_norm", "dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise ConfigParse(f"family {name} must be a number, got {value!r}")
            if not np.isfinite(value):
                raise ConfigParse(f"family {name} must be finite, got {value}")
        if self.dim != int(self.dim) or self.dim < 2:
            raise ConfigParse(f"family dim must be an integer >= 2, got {self.dim}")
        self.dim = int(self.dim)
        if self.v_norm < 0:
            raise ConfigParse(f"family v_norm must be >= 0, got {self.v_norm}")


@dataclass
class ScenarioConfig:
    family: FamilySpec
    omega: float
    beta: float
    s_max: float
    n_steps: int
    degeneracy_threshold: Optional[float] = None
    fd_step: float = 0.0
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        for name in ("omega", "beta", "s_max", "fd_step"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ConfigParse(f"{name} must be finite, got {value}")
        threshold = self.degeneracy_threshold
        if threshold is not None and not np.isfinite(threshold):
            raise ConfigParse("degeneracy_threshold must be finite")

    @property
    def schedule(self) -> DrivingSchedule:
        return DrivingSchedule(self.omega, self.s_max, self.n_steps)

    def with_axis(self, axis: str, value) -> "ScenarioConfig":
        if axis not in SWEEP_AXES:
            raise ConfigParse(f"unknown sweep axis {axis!r}, choose from {SWEEP_AXES}")
        value = int(value) if axis == "n_steps" else float(value)
        return replace(self, **{axis: value})


_MATRIX_FIELDS = ("H0", "V", "A", "B")


def _family_spec(data) -> FamilySpec:
    if not isinstance(data, dict) or "variant" not in data:
        raise ConfigParse("family must be an object with a 'variant' entry")
    known = {f.name for f in fields(FamilySpec)}
    unknown = set(data) - known
    if unknown:
        raise ConfigParse(f"unknown family entries {sorted(unknown)}")
    values = dict(data)
    for name in _MATRIX_FIELDS:
        if values.get(name) is not None:
            values[name] = parse_complex_matrix(values[name], name)
    if values.get("wire") is not None:
        try:
            values["wire"] = WireModelParams(**values["wire"])
        except TypeError as e:
            raise ConfigParse(f"wire parameters: {e}") from e
    return FamilySpec(**values)


def scenario_from_dict(data: dict, conf: Optional[dict] = None) -> ScenarioConfig:
    """Scenario from parsed JSON. Entries missing from the scenario fall back
    to the ``simulation`` section of the configuration."""
    if not isinstance(data, dict):
        raise ConfigParse("scenario must be a JSON object")
    simulation = (conf or {}).get("simulation", {})
    required = ("family", "omega", "beta", "s_max", "n_steps")
    missing = [name for name in required if name not in data]
    if missing:
        raise ConfigParse(f"missing scenario entries {missing}")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigParse(f"unknown scenario entries {sorted(unknown)}")
    values = dict(data)
    values["family"] = _family_spec(data["family"])
    values.setdefault("fd_step", simulation.get("fd_step", 0.0))
    try:
        for name in ("omega", "beta", "s_max", "fd_step"):
            values[name] = float(values[name])
        if int(values["n_steps"]) != values["n_steps"]:
            raise ValueError(f"n_steps must be an integer, got {values['n_steps']}")
        values["n_steps"] = int(values["n_steps"])
        values["seed"] = int(values.get("seed", 0))
        if values.get("degeneracy_threshold") is not None:
            values["degeneracy_threshold"] = float(values["degeneracy_threshold"])
    except (TypeError, ValueError) as e:
        raise ConfigParse(str(e)) from e
    return ScenarioConfig(**values)


def load_scenario(path, conf: Optional[dict] = None) -> ScenarioConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise FileIO(f"cannot read {path}: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParse(f"{path}: {e}") from e
    return scenario_from_dict(data, conf)


def random_isospectral_matrices(dim: int, v_norm: float, seed: int):
    """Random Hermitian H0 with unit operator norm and V with norm v_norm."""
    rng = np.random.default_rng(seed)

    def draw():
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (x + x.conj().T) / 2
        return h / np.max(np.abs(np.linalg.eigvalsh(h)))

    return draw(), v_norm * draw()


def _require(family: FamilySpec, *names):
    for name in names:
        if getattr(family, name) is None:
            raise ConfigParse(f"variant {family.variant!r} needs {name}")


def build_family(config: ScenarioConfig) -> DrivenHamiltonian:
    family = config.family
    variant = family.variant
    try:
        if variant == "uniform_isospectral":
            _require(family, "H0", "V")
            return family_class_dict[variant](family.H0, family.V)
        if variant == "dilated_isospectral":
            _require(family, "H0", "V")
            return family_class_dict[variant](family.H0, family.V, family.dilation)
        if variant == "linear_interpolation":
            _require(family, "A", "B")
            return family_class_dict[variant](family.A, family.B, config.s_max)
        if variant == "constant":
            _require(family, "H0")
            return constant_family(family.H0)
        if variant == "random_isospectral":
            return family_class_dict["uniform_isospectral"](
                *random_isospectral_matrices(family.dim, family.v_norm, config.seed)
            )
        if variant == "wire":
            params = family.wire if family.wire is not None else WireModelParams()
            return WireSpin(params)
    except (DimensionMismatch, NonHermitianInput) as e:
        raise type(e)(f"family {variant!r}: {e}") from e
    raise ConfigParse(f"unknown family variant {variant!r}")


def run_scenario(config: ScenarioConfig, conf: Optional[dict] = None) -> AuditResult:
    """Build the family and run the full propagation and bound audit."""
    simulation = (conf or {}).get("simulation", {})
    family = build_family(config)
    threshold = config.degeneracy_threshold
    if threshold is None:
        spectral_range = family.spectral_range()
        rel = simulation.get("degeneracy_threshold_rel", DEFAULT_DEGENERACY_REL)
        threshold = rel * (spectral_range if spectral_range > 0 else 1.0)
    return audit_drive(
        family,
        config.schedule,
        config.beta,
        degeneracy_threshold=threshold,
        fd_step=config.fd_step,
        tolerance=simulation.get("bound_tolerance", 1e-8),
        step_guard=simulation.get("step_guard", 1.0),
        step_warn=simulation.get("step_warn", 0.5),
    )


def scenario_summary(config: ScenarioConfig, result: AuditResult) -> dict:
    report = result.report
    return dict(
        omega=config.omega,
        beta=config.beta,
        s_max=config.s_max,
        n_steps=config.n_steps,
        variant=config.family.variant,
        final_lhs=report.lhs_measured[-1],
        final_rhs=report.rhs_total[-1],
        max_lhs=np.max(report.lhs_measured),
        min_margin=report.min_margin,
        spectrum_deviation=verify_spectrum_conservation(result.trajectory),
    )


def write_outputs(
    config: ScenarioConfig,
    result: AuditResult,
    out_dir,
    conf: Optional[dict] = None,
    dump: bool = False,
) -> dict:
    """Trajectory and bound report CSVs plus a JSON summary in out_dir."""
    output = (conf or {}).get("output", {})
    float_format = output.get("float_format", "%.17g")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        export_trajectory(
            result.trajectory,
            out_dir / TRAJECTORY_FILENAME,
            float_format=float_format,
        )
        export_report(
            result.report, out_dir / REPORT_FILENAME, float_format=float_format
        )
        summary = scenario_summary(config, result)
        with open(out_dir / SUMMARY_FILENAME, "w") as f:
            json.dump(clean_json(summary), f, indent=2)
        if dump or output.get("dump_states", False):
            dump_states(
                result.trajectory, out_dir / STATES_FILENAME, clean_json(summary)
            )
    except OSError as e:
        raise FileIO(f"cannot write results to {out_dir}: {e.strerror}") from e
    return summary


@dataclass
class SweepOutcome:
    index: int
    value: float
    final_lhs: float = float("nan")
    final_rhs: float = float("nan")
    status: str = "ok"


def execute_sweep_task(
    index, value, config: ScenarioConfig, out_dir, conf=None
) -> SweepOutcome:
    """One sweep scenario; failures are reported in the status, not raised."""
    try:
        result = run_scenario(config, conf)
        summary = write_outputs(config, result, out_dir, conf)
    except Exception as e:
        return SweepOutcome(index, value, status=f"{type(e).__name__}: {e}")
    return SweepOutcome(
        index, value, float(summary["final_lhs"]), float(summary["final_rhs"])
    )


def load_wire_experiment(path=None) -> WireExperiment:
    if path is None:
        return WireExperiment()
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise FileIO(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigParse(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigParse("wire parameters must be a JSON object")
    try:
        return WireExperiment(**data)
    except (TypeError, InvalidWireParameters) as e:
        raise ConfigParse(f"wire parameters: {e}") from e

