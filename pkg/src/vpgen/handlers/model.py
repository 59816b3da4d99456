"""Experiment configuration and handler request/response models.

Every default lives on the models, so a loaded configuration carries all of
them and its serialization is the complete description of an experiment.
"""

__all__ = [
    "ColdDatumConfig",
    "ConfigError",
    "DEFAULT_WIDTHS",
    "DatumConfig",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentRequest",
    "ExperimentResponse",
    "GridConfig",
    "LimitConfig",
    "PoissonConfig",
    "ScaleCheckConfig",
    "ShellConfig",
    "ShellDatumConfig",
    "SmoothDatumConfig",
    "StabilityConfig",
    "load_config",
    "parse_config",
    "save_config",
]

import json
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any, Literal

from aibs_informatics_core.models.base import PydanticBaseModel
from aibs_informatics_core.utils.json import load_json_object
from pydantic import ConfigDict, Field, ValidationError, field_validator, model_validator

from vpgen.asymptotics.fitting import DEFAULT_TOLERANCE
from vpgen.asymptotics.model import PerturbationMode, SweepSpec
from vpgen.dynamics.integrator import DEFAULT_ETA, DEFAULT_STENCIL
from vpgen.limits.compare import DEFAULT_OBSERVABLES
from vpgen.limits.model import PROFILE_BINS
from vpgen.limits.oracles import DEFAULT_LABELS, DEFAULT_ORACLE_RATIO
from vpgen.radial_field.vanishing import DEFAULT_SPACING, DEFAULT_SUBSAMPLES
from vpgen.scales.model import (
    ColdDatum,
    DensityProfile,
    Scale,
    ScaleFamily,
    Shell,
    ShellDatum,
    SingularDatum,
    SmoothDatum,
    VelocityLaw,
    iterated_log,
    power_law,
    power_of_log,
)

DEFAULT_WIDTHS = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]
DEFAULT_OUTPUT_DIR = "vpgen-out"


class ConfigError(ValueError):
    pass


class ExperimentKind(StrEnum):
    RUN = "run"
    SWEEP = "sweep"
    STABILITY = "stability"
    LIMIT = "limit"
    POISSON_CHECK = "poisson-check"
    SCALE_CHECK = "scale-check"


class StrictModel(PydanticBaseModel):
    model_config = ConfigDict(extra="forbid")


class ColdDatumConfig(StrictModel):
    variant: Literal["cold"] = "cold"
    mass: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    radius: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    profile: DensityProfile = DensityProfile.UNIFORM
    velocity: VelocityLaw = VelocityLaw.ZERO
    hubble_rate: float = 0.0

    def to_datum(self, gamma: int) -> ColdDatum:
        return ColdDatum(
            mass=self.mass,
            radius=self.radius,
            profile=self.profile,
            velocity=self.velocity,
            hubble_rate=self.hubble_rate,
            gamma=gamma,
        )


class ShellConfig(StrictModel):
    radius: float = Field(gt=0, allow_inf_nan=False)
    mass: float = Field(gt=0, allow_inf_nan=False)
    velocity: float = 0.0


class ShellDatumConfig(StrictModel):
    variant: Literal["shell"] = "shell"
    shells: list[ShellConfig] = Field(min_length=1)

    def to_datum(self, gamma: int) -> ShellDatum:
        return ShellDatum(
            shells=tuple(Shell(s.radius, s.velocity, s.mass) for s in self.shells), gamma=gamma
        )


class SmoothDatumConfig(StrictModel):
    variant: Literal["smooth"] = "smooth"
    mass: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    radius: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    velocity_radius: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    def to_datum(self, gamma: int) -> SmoothDatum:
        return SmoothDatum(
            mass=self.mass,
            radius=self.radius,
            velocity_radius=self.velocity_radius,
            gamma=gamma,
        )


DatumConfig = Annotated[
    ColdDatumConfig | ShellDatumConfig | SmoothDatumConfig, Field(discriminator="variant")
]


class GridConfig(StrictModel):
    bins: int = Field(default=400, ge=1)
    padding: float = Field(default=1.25, ge=1.0)


class StabilityConfig(StrictModel):
    delta: float = Field(default=1e-6, ge=0)
    mode: PerturbationMode = PerturbationMode.DATA
    widths: list[float] | None = None
    linear_check: bool = True


class LimitConfig(StrictModel):
    dt_oracle_ratio: int = Field(default=DEFAULT_ORACLE_RATIO, ge=1)
    labels: int = Field(default=DEFAULT_LABELS, ge=2)
    observables: list[str] = Field(default_factory=lambda: list(DEFAULT_OBSERVABLES))
    profile_bins: int = Field(default=PROFILE_BINS, ge=1)
    horizon_fraction: float = Field(default=0.9, gt=0, le=1)
    oracle_gamma: Literal[-1, 0, 1] | None = None

    @field_validator("observables")
    @classmethod
    def _known_observables(cls, value: list[str]) -> list[str]:
        unknown = sorted(set(value) - set(DEFAULT_OBSERVABLES))
        if unknown:
            raise ValueError(f"unknown observables {unknown}")
        return value


class PoissonConfig(StrictModel):
    particles: int = Field(default=100_000, ge=1)
    points: list[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0])
    spacing: float = Field(default=DEFAULT_SPACING, gt=0)
    subsamples: int = Field(default=DEFAULT_SUBSAMPLES, ge=1)
    profile_tolerance: float = Field(default=1e-6, gt=0)
    convolution_tolerance: float = Field(default=1e-3, gt=0)
    vanishing_tolerance: float = Field(default=1e-6, gt=0)
    plateau_inner: float = Field(default=10.0, gt=0)
    plateau_outer: float = Field(default=20.0, gt=0)


class ScaleCheckConfig(StrictModel):
    family: ScaleFamily = ScaleFamily.POWER_OF_LOG
    p: float = Field(default=2.0, gt=0)
    variant: Literal[1, 2] = 1
    exponent: float = Field(default=0.5, gt=0)
    a: float = Field(default=0.1, gt=0)

    def to_scale(self) -> Scale:
        if self.family == ScaleFamily.POWER_OF_LOG:
            return power_of_log(self.p)
        if self.family == ScaleFamily.ITERATED_LOG:
            return iterated_log(self.p, self.exponent)
        return power_law(self.a)


class ExperimentConfig(StrictModel):
    """Declarative experiment configuration.

    Attributes:
        kind: Which pipeline the configuration drives.
        datum: Cold, shell or smooth singular datum.
        gamma: Coupling sign: 1 attractive, -1 repulsive, 0 field-free control.
        widths: Mollification widths, strictly decreasing in (0, 1].
        n0: Particles at the first width; n(s) = n0 s0 / s.
        T: Horizon of every run.
        eta: Time-step factor, dt = eta min(s^(2/3), 0.01).
        sample_every: Steps between metric samples.
        stencil: Tangent stiffness stencil.
        seed: Key of every counter-based generator.
        track_tangent: Carry first-order Jacobians.
        zero_spread: Cold data without velocity spread.
        central_mass: Fixed point mass at the origin.
        tolerance: Exponent tolerance of the zero order estimate table.
        t_star: Evaluation time of that table; materialized as 0.75 T.
        output_dir: Directory receiving every artifact.
    """

    kind: ExperimentKind
    datum: DatumConfig = Field(default_factory=ColdDatumConfig)
    gamma: Literal[-1, 0, 1] = 1
    widths: list[float] = Field(default_factory=lambda: list(DEFAULT_WIDTHS), min_length=1)
    n0: int = Field(default=20_000, ge=1)
    T: float = Field(default=0.8, gt=0, allow_inf_nan=False)
    eta: float = Field(default=DEFAULT_ETA, gt=0, le=1)
    sample_every: int = Field(default=10, ge=1)
    stencil: float = Field(default=DEFAULT_STENCIL, gt=0, lt=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    track_tangent: bool = True
    zero_spread: bool = False
    central_mass: float = Field(default=0.0, ge=0)
    tolerance: float = Field(default=DEFAULT_TOLERANCE, ge=0)
    t_star: float | None = None
    output_dir: str = DEFAULT_OUTPUT_DIR
    grid: GridConfig = Field(default_factory=GridConfig)
    stability: StabilityConfig = Field(default_factory=StabilityConfig)
    limit: LimitConfig = Field(default_factory=LimitConfig)
    poisson: PoissonConfig = Field(default_factory=PoissonConfig)
    scale_check: ScaleCheckConfig = Field(default_factory=ScaleCheckConfig)

    @field_validator("widths")
    @classmethod
    def _decreasing_widths(cls, value: list[float]) -> list[float]:
        if any(not 0 < s <= 1 for s in value):
            raise ValueError(f"widths must lie in (0, 1], got {value}")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError(f"widths must be strictly decreasing, got {value}")
        return value

    @model_validator(mode="after")
    def _materialize(self) -> "ExperimentConfig":
        if self.t_star is None:
            self.t_star = 0.75 * self.T
        elif not 0 <= self.t_star <= self.T:
            raise ValueError(f"t_star={self.t_star} must lie in [0, T={self.T}]")
        return self

    def to_datum(self) -> SingularDatum:
        return self.datum.to_datum(self.gamma)

    def to_sweep_spec(self, widths: list[float] | None = None) -> SweepSpec:
        return SweepSpec(
            datum=self.to_datum(),
            widths=tuple(self.widths if widths is None else widths),
            n0=self.n0,
            T=self.T,
            eta=self.eta,
            sample_every=self.sample_every,
            grid_bins=self.grid.bins,
            grid_padding=self.grid.padding,
            stencil=self.stencil,
            seed=self.seed,
            track_tangent=self.track_tangent,
            zero_spread=self.zero_spread,
            central_mass=self.central_mass,
            reference_width=self.widths[0],
        )


def _describe(error: ValidationError) -> str:
    unknown, missing, invalid = [], [], []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            unknown.append(location)
        elif item["type"] == "missing":
            missing.append(location)
        else:
            invalid.append(f"{location} ({item['msg']})")
    parts = []
    if unknown:
        parts.append(f"unknown keys: {', '.join(unknown)}")
    if missing:
        parts.append(f"missing keys: {', '.join(missing)}")
    if invalid:
        parts.append(f"invalid values: {', '.join(invalid)}")
    return "; ".join(parts)


def parse_config(payload: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {_describe(e)}") from e


def load_config(path: Path | str) -> ExperimentConfig:
    """Read a JSON experiment configuration with every default materialized.

    Raises:
        ConfigError: If the file is unreadable, not a JSON object, or fails the schema.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist")
    try:
        payload = load_json_object(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Could not read config {path}: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    return parse_config(payload)


def save_config(config: ExperimentConfig, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return path


class ExperimentRequest(PydanticBaseModel):
    config: ExperimentConfig
    output_dir: str
    threads: int = Field(default=1, ge=1)


class ExperimentResponse(PydanticBaseModel):
    output_dir: str
    artifacts: list[str] = Field(default_factory=list)
    failures: list[dict[str, float | str]] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict)
