"""Data models for the reduced characteristic flow and its recorded diagnostics."""

__all__ = [
    "AUXILIARY_COLUMNS",
    "IntegrationError",
    "METRICS_COLUMNS",
    "Observer",
    "RunMetrics",
    "SimState",
]

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from vpgen.radial_field.model import FieldSnapshot, RadialGrid

METRICS_COLUMNS = ["t", "P", "Q", "rho_sup", "force_sup", "u_sup", "mass", "energy", "tangent_sup"]
AUXILIARY_COLUMNS = ["key_ratio", "max_r2_force", "min_bound", "invalid_fraction", "support_bound"]


class IntegrationError(ValueError):
    pass


@dataclass
class SimState:
    """Particle state in reduced coordinates (r, vr, L), kept sorted by (r, id).

    Attributes:
        r (np.ndarray): Radii.
        vr (np.ndarray): Radial velocities.
        L (np.ndarray): Angular momenta, constant along the flow.
        m (np.ndarray): Weights, never changed.
        ids (np.ndarray): Stable particle labels.
        t (float): Time.
        gamma (int): Coupling sign; 0 switches the self-field off.
        P (float): Running sup of particle speeds.
        Q (float): Running sup of particle radii.
        initial_support (float): Q at t = 0.
        total_mass (float): Exact sum of the weights.
        central_mass (float): Fixed point mass at the origin, always coupled attractively.
        forcing (np.ndarray | None): Extra per-particle radial acceleration.
        tangent (np.ndarray | None): Per-particle 2x2 Jacobians d(r, vr)/d(r0, vr0).
        tangent_valid (np.ndarray | None): Particles whose last tangent update was trusted.
        acceleration (np.ndarray | None): Acceleration at the current positions.
    """

    r: np.ndarray
    vr: np.ndarray
    L: np.ndarray
    m: np.ndarray
    ids: np.ndarray
    t: float
    gamma: int
    P: float
    Q: float
    initial_support: float
    total_mass: float
    central_mass: float = 0.0
    forcing: np.ndarray | None = None
    tangent: np.ndarray | None = None
    tangent_valid: np.ndarray | None = None
    acceleration: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def tracks_tangent(self) -> bool:
        return self.tangent is not None

    @property
    def support_bound(self) -> float:
        """Recorded bound Q(0) + t P(t) on the spatial support."""
        return self.initial_support + self.t * self.P

    def speeds(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            tangential = np.where(self.r > 0, self.L / np.where(self.r > 0, self.r, 1.0), 0.0)
        return np.sqrt(self.vr**2 + tangential**2)

    def by_id(self) -> np.ndarray:
        """Permutation that lists the particles in increasing id."""
        return np.argsort(self.ids, kind="stable")


@dataclass
class RunMetrics:
    """Sampled time series of one run.

    ``frame`` holds the fixed CSV columns followed by the auxiliary columns
    (key-estimate ratio, max r^2 |u'|, min-bound constant, fraction of
    invalidated tangents, support bound).
    """

    frame: pd.DataFrame
    dt: float
    width: float = math.nan
    fvalue_cap: float = math.nan
    n_particles: int = 0
    gamma: int = 1
    grid: RadialGrid | None = None
    grid_extended: bool = False
    final_state: SimState | None = field(default=None, repr=False)

    def to_frame(self) -> pd.DataFrame:
        return self.frame[METRICS_COLUMNS].copy()

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy()

    def at_time(self, t: float) -> pd.Series:
        """Sampled row closest to time t."""
        times = self.column("t")
        return self.frame.iloc[int(np.argmin(np.abs(times - t)))]

    def sup_until(self, name: str, t: float) -> float:
        times = self.column("t")
        values = self.column(name)[times <= t + 1e-12]
        values = values[np.isfinite(values)]
        return float(values.max()) if values.size else math.nan

    @property
    def max_invalid_fraction(self) -> float:
        values = self.column("invalid_fraction")
        return float(np.max(values[np.isfinite(values)], initial=0.0))

    @classmethod
    def from_csv(cls, path, dt: float = math.nan, width: float = math.nan) -> "RunMetrics":
        frame = pd.read_csv(path)
        for name in AUXILIARY_COLUMNS:
            if name not in frame:
                frame[name] = math.nan
        return cls(frame=frame, dt=dt, width=width)


Observer = Callable[[SimState, FieldSnapshot], None]
