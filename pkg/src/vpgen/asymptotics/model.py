"""Data models for width sweeps, exponent fits and stability experiments."""

__all__ = [
    "ExponentFit",
    "FitError",
    "GronwallFit",
    "LemmaRow",
    "LemmaTable",
    "PerturbationMode",
    "RUNS_COLUMNS",
    "RunStatus",
    "STABILITY_COLUMNS",
    "SUMMARY_COLUMNS",
    "StabilityError",
    "StabilityReport",
    "SweepResult",
    "SweepRun",
    "SweepSpec",
    "TangentFit",
    "metrics_filename",
]

import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import pandas as pd

from vpgen.dynamics.model import RunMetrics
from vpgen.radial_field.model import RadialGrid
from vpgen.scales.model import ParticleEnsemble, ShellDatum, SingularDatum
from vpgen.scales.regularize import speeds

SUMMARY_COLUMNS = ["quantity", "slope", "intercept", "r2", "bound", "pass"]
STABILITY_COLUMNS = ["s", "delta", "dZ", "drho", "dforce", "amplification"]
RUNS_COLUMNS = ["s", "n_particles", "dt", "fvalue_cap", "fvalue_measured", "status"]

MAX_GRID_NODES = 200_001


class FitError(ValueError):
    pass


class StabilityError(ValueError):
    pass


class PerturbationMode(StrEnum):
    DATA = "data"
    FORCING = "forcing"


class RunStatus(StrEnum):
    OK = "ok"
    UNDER_RESOLVED = "under-resolved"
    FAILED = "failed"


def metrics_filename(width: float) -> str:
    return f"metrics_s{width:.6g}.csv"


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of a width sweep.

    Attributes:
        datum (SingularDatum): The singular datum; carries gamma.
        widths (tuple[float, ...]): Widths s in (0, 1], strictly decreasing.
        n0 (int): Particle count at the reference width.
        T (float): Horizon of every run.
        eta (float): Time-step factor of `choose_dt`.
        sample_every (int): Steps between metric samples.
        grid_bins (int): Radial bins over the grid radius.
        grid_padding (float): Grid radius as a multiple of Q(0) + T P(0).
        stencil (float): Tangent stiffness stencil.
        seed (int): Key of the sampling generator.
        track_tangent (bool): Carry first-order Jacobians.
        zero_spread (bool): Cold data without velocity spread.
        central_mass (float): Fixed point mass at the origin.
        reference_width (float | None): s0 in n(s) = n0 s0 / s; defaults to the first width.
    """

    datum: SingularDatum
    widths: tuple[float, ...]
    n0: int = 20_000
    T: float = 0.8
    eta: float = 0.1
    sample_every: int = 10
    grid_bins: int = 400
    grid_padding: float = 1.25
    stencil: float = 0.02
    seed: int = 0
    track_tangent: bool = True
    zero_spread: bool = False
    central_mass: float = 0.0
    reference_width: float | None = None

    def __post_init__(self):
        widths = tuple(float(s) for s in self.widths)
        if not widths:
            raise FitError("A sweep needs at least one width")
        if any(not 0 < s <= 1 for s in widths):
            raise FitError(f"Widths must lie in (0, 1], got {widths}")
        if any(b >= a for a, b in zip(widths, widths[1:])):
            raise FitError(f"Widths must be strictly decreasing, got {widths}")
        object.__setattr__(self, "widths", widths)
        if self.n0 < 1 or self.T <= 0 or self.sample_every < 1 or self.grid_bins < 1:
            raise FitError(
                f"Invalid sweep parameters n0={self.n0}, T={self.T}, "
                f"sample_every={self.sample_every}, grid_bins={self.grid_bins}"
            )

    @property
    def gamma(self) -> int:
        return self.datum.gamma

    @property
    def s0(self) -> float:
        return self.widths[0] if self.reference_width is None else self.reference_width

    def n_particles(self, s: float) -> int:
        """n(s) = n0 s0 / s, keeping kernel widths resolved as s shrinks."""
        return max(1, int(round(self.n0 * self.s0 / s)))

    def grid_for(self, ensemble: ParticleEnsemble) -> RadialGrid:
        """Uniform grid over the projected support, resolving shell widths by 4 bins."""
        reach = float(ensemble.r.max()) + self.T * float(speeds(ensemble).max())
        r_max = self.grid_padding * max(reach, float(ensemble.r.max()) * 1.01, 1e-12)
        bins = self.grid_bins
        if isinstance(self.datum, ShellDatum) and ensemble.kernel_width > 0:
            bins = max(bins, int(math.ceil(4.0 * r_max / ensemble.kernel_width)))
        bins = min(bins, MAX_GRID_NODES - 1)
        return RadialGrid.uniform(r_max, bins)


@dataclass
class SweepRun:
    """Outcome of one width of a sweep."""

    width: float
    n_particles: int
    dt: float = math.nan
    fvalue_cap: float = math.nan
    fvalue_measured: float = math.nan
    kernel_width: float = math.nan
    status: RunStatus = RunStatus.OK
    error: str | None = None
    metrics: RunMetrics | None = None

    @property
    def succeeded(self) -> bool:
        return self.metrics is not None


@dataclass
class SweepResult:
    """Runs of a sweep in ascending width, with the recorded failures."""

    spec: SweepSpec
    runs: list[SweepRun]
    failures: list[dict[str, str | float]] = field(default_factory=list)

    @property
    def successful(self) -> list[SweepRun]:
        return [run for run in self.runs if run.succeeded]

    def runs_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "s": run.width,
                    "n_particles": run.n_particles,
                    "dt": run.dt,
                    "fvalue_cap": run.fvalue_cap,
                    "fvalue_measured": run.fvalue_measured,
                    "status": str(run.status),
                }
                for run in self.runs
            ],
            columns=RUNS_COLUMNS,
        )


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit log q = intercept + slope log(1/s).

    Attributes:
        quantity (str): Name of the fitted quantity.
        widths (tuple[float, ...]): Widths s_k.
        values (tuple[float, ...]): Positive values q_k.
        slope (float): Growth exponent in 1/s.
        intercept (float): log of the constant C.
        r2 (float): Coefficient of determination; 1 for constant data.
    """

    quantity: str
    widths: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    r2: float

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


@dataclass(frozen=True)
class LemmaRow:
    quantity: str
    slope: float
    intercept: float
    r2: float
    bound: float
    passed: bool | None

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "bound": self.bound,
            "pass": "" if self.passed is None else self.passed,
        }


@dataclass(frozen=True)
class LemmaTable:
    rows: tuple[LemmaRow, ...]
    t_star: float
    tolerance: float

    def __getitem__(self, quantity: str) -> LemmaRow:
        for row in self.rows:
            if row.quantity == quantity:
                return row
        raise KeyError(quantity)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows if row.passed is not None)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=SUMMARY_COLUMNS)


@dataclass(frozen=True)
class TangentFit:
    """Fit log(sup tangent norm at T) = intercept + C s^-2."""

    C: float
    intercept: float
    r2: float
    max_residual: float
    passed: bool
    invalid_fraction: float = 0.0


@dataclass(frozen=True)
class GronwallFit:
    """Finite constants with amplification <= exp(A s^(-4/3) exp(B s^(-2))) at every width."""

    A: float
    B: float
    widths: tuple[float, ...]
    amplifications: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return math.isfinite(self.A) and math.isfinite(self.B)

    def bound(self, s: np.ndarray | float) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        with np.errstate(over="ignore"):
            return np.exp(self.A * s ** (-4.0 / 3.0) * np.exp(self.B * s**-2.0))


@dataclass(frozen=True)
class StabilityReport:
    """Sup-over-time differences between a base run and a perturbed run.

    Attributes:
        width (float): Mollification width s.
        delta (float): Perturbation size.
        mode (PerturbationMode): Perturbed data or per-step forcing.
        T (float): Horizon.
        dZ (float): sup_t max_i |(r, vr) - (r~, vr~)| matched by particle id.
        drho (float): sup_t sup_r of the density difference.
        dforce (float): sup_t sup_r of the force difference.
        amplification (float): Largest difference divided by delta; 0 when delta is 0.
        history (pd.DataFrame | None): Per-sample differences (t, dZ, drho, dforce).
    """

    width: float
    delta: float
    mode: PerturbationMode
    T: float
    dZ: float
    drho: float
    dforce: float
    amplification: float
    history: pd.DataFrame | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict[str, float]:
        return {
            "s": self.width,
            "delta": self.delta,
            "dZ": self.dZ,
            "drho": self.drho,
            "dforce": self.dforce,
            "amplification": self.amplification,
        }
