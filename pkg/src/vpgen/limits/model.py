"""Data models for singular-limit oracles and their comparison with particle runs."""

__all__ = [
    "COMPARISON_COLUMNS",
    "ObservableSeries",
    "OracleError",
    "OracleEvent",
    "OracleEventKind",
    "OracleTrajectory",
    "TRAJECTORY_COLUMNS",
    "mass_observables",
]

import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import pandas as pd

TRAJECTORY_COLUMNS = ["t", "label", "r", "vr"]
COMPARISON_COLUMNS = ["s", "observable", "error"]
QUANTILES = {"r10": 0.1, "r50": 0.5, "r90": 0.9}
PROFILE_BINS = 16


class OracleError(ValueError):
    pass


class OracleEventKind(StrEnum):
    CROSSING = "crossing"
    CENTER = "center"


@dataclass(frozen=True)
class OracleEvent:
    time: float
    kind: OracleEventKind
    labels: tuple[int, ...]


@dataclass
class OracleTrajectory:
    """Per-label radii and velocities of a limit system.

    Attributes:
        times (np.ndarray): Recorded times, shape (k,).
        r (np.ndarray): Radii per time and label, shape (k, n).
        vr (np.ndarray): Radial velocities per time and label, shape (k, n).
        masses (np.ndarray): Mass carried by each label.
        labels (np.ndarray): Label ids in column order.
        gamma (int): Coupling sign.
        events (list[OracleEvent]): Crossing and center events in time order.
        stop_time (float): Time the integration stopped (horizon or center).
    """

    times: np.ndarray
    r: np.ndarray
    vr: np.ndarray
    masses: np.ndarray
    labels: np.ndarray
    gamma: int
    events: list[OracleEvent] = field(default_factory=list)
    stop_time: float = math.nan

    @property
    def first_crossing(self) -> float:
        crossings = [e.time for e in self.events if e.kind == OracleEventKind.CROSSING]
        return min(crossings, default=math.inf)

    @property
    def center_time(self) -> float:
        centers = [e.time for e in self.events if e.kind == OracleEventKind.CENTER]
        return min(centers, default=math.inf)

    @property
    def horizon(self) -> float:
        """Last time at which the oracle is valid; integration stops at the events that end it."""
        if math.isfinite(self.stop_time):
            return min(self.stop_time, self.center_time)
        return min(self.center_time, float(self.times[-1]))

    def to_frame(self) -> pd.DataFrame:
        k, n = self.r.shape
        return pd.DataFrame(
            {
                "t": np.repeat(self.times, n),
                "label": np.tile(self.labels, k),
                "r": self.r.reshape(-1),
                "vr": self.vr.reshape(-1),
            },
            columns=TRAJECTORY_COLUMNS,
        )


def mass_observables(
    r: np.ndarray, vr: np.ndarray, m: np.ndarray, bins: int = PROFILE_BINS
) -> tuple[dict[str, float], np.ndarray]:
    """Mass-quantile radii and the mass-binned mean radial velocity profile.

    Each particle sits at the midpoint of its mass interval in the cumulative
    mass coordinate; quantile radii interpolate between particles and the
    profile averages vr over equal-mass bins.
    """
    order = np.lexsort((np.arange(r.size), r))
    r, vr, m = r[order], vr[order], m[order]
    total = math.fsum(m)
    coordinate = (np.cumsum(m) - 0.5 * m) / total
    radii = {name: float(np.interp(q, coordinate, r)) for name, q in QUANTILES.items()}
    index = np.clip((coordinate * bins).astype(int), 0, bins - 1)
    weight = np.bincount(index, weights=m, minlength=bins)
    momentum = np.bincount(index, weights=m * vr, minlength=bins)
    with np.errstate(divide="ignore", invalid="ignore"):
        profile = np.where(weight > 0, momentum / np.where(weight > 0, weight, 1.0), np.nan)
    return radii, profile


@dataclass
class ObservableSeries:
    """Sampled mass-quantile radii and velocity profiles of a run or an oracle."""

    times: list[float] = field(default_factory=list)
    r10: list[float] = field(default_factory=list)
    r50: list[float] = field(default_factory=list)
    r90: list[float] = field(default_factory=list)
    profiles: list[np.ndarray] = field(default_factory=list)
    horizon: float = math.inf

    def append(self, t: float, r: np.ndarray, vr: np.ndarray, m: np.ndarray, bins: int):
        radii, profile = mass_observables(r, vr, m, bins)
        self.times.append(float(t))
        self.r10.append(radii["r10"])
        self.r50.append(radii["r50"])
        self.r90.append(radii["r90"])
        self.profiles.append(profile)

    def values(self, observable: str) -> np.ndarray:
        if observable == "vr_profile":
            return np.vstack(self.profiles)
        return np.asarray(getattr(self, observable), dtype=np.float64)

    @classmethod
    def from_trajectory(
        cls, trajectory: OracleTrajectory, bins: int = PROFILE_BINS
    ) -> "ObservableSeries":
        series = cls(horizon=trajectory.horizon)
        for k, t in enumerate(trajectory.times):
            series.append(t, trajectory.r[k], trajectory.vr[k], trajectory.masses, bins)
        return series
