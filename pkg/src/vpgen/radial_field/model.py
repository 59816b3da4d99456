"""Data models for the spherically symmetric Poisson field."""

__all__ = [
    "EnclosedMass",
    "FieldError",
    "FieldSnapshot",
    "ParticleColumns",
    "PointCloud",
    "PotentialRepresentative",
    "RadialDensity",
    "RadialGrid",
    "VanishingConditions",
    "VanishingSolution",
]

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import pandas as pd

SNAPSHOT_COLUMNS = ["r", "M", "rho", "u", "uprime"]


class FieldError(ValueError):
    pass


class ParticleColumns(Protocol):
    """Anything carrying particle radii, weights and stable labels."""

    r: np.ndarray
    m: np.ndarray
    ids: np.ndarray


@dataclass(frozen=True)
class RadialGrid:
    """Radial nodes 0 = r_0 < r_1 < ... < r_J; bins are [r_j, r_{j+1}]."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 2:
            raise FieldError("A radial grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise FieldError(f"Radial grid must start at r=0, got {nodes[0]}")
        if np.any(np.diff(nodes) <= 0):
            raise FieldError("Radial grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, r_max: float, bins: int) -> "RadialGrid":
        if not (r_max > 0 and bins >= 1):
            raise FieldError(f"Invalid uniform grid r_max={r_max}, bins={bins}")
        return cls(nodes=np.linspace(0.0, r_max, bins + 1))

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def bins(self) -> int:
        return int(self.nodes.size - 1)

    def covers(self, radius: float) -> bool:
        return radius < self.r_max

    def extended(self, factor: float = 2.0) -> "RadialGrid":
        """Append nodes with the outermost spacing up to `factor` times r_max."""
        step = float(self.nodes[-1] - self.nodes[-2])
        count = max(1, int(math.ceil((factor - 1.0) * self.r_max / step)))
        extra = self.r_max + step * np.arange(1, count + 1)
        return RadialGrid(nodes=np.concatenate([self.nodes, extra]))


@dataclass(frozen=True)
class EnclosedMass:
    """Particle radii sorted by (r, id) with their prefix masses.

    ``prefix[k]`` is the mass of the first k sorted particles and
    ``prefix[-1]`` is the exact total (``math.fsum``) of the weights.
    """

    radii: np.ndarray
    masses: np.ndarray
    prefix: np.ndarray
    order: np.ndarray

    @classmethod
    def from_particles(cls, particles: ParticleColumns) -> "EnclosedMass":
        order = np.lexsort((particles.ids, particles.r))
        radii = np.asarray(particles.r)[order]
        masses = np.asarray(particles.m)[order]
        prefix = np.empty(radii.size + 1)
        prefix[0] = 0.0
        np.cumsum(masses, out=prefix[1:])
        prefix[-1] = math.fsum(masses)
        return cls(radii=radii, masses=masses, prefix=prefix, order=order)

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def below(self, r: np.ndarray | float) -> np.ndarray:
        """Mass strictly inside radius r."""
        return self.prefix[np.searchsorted(self.radii, r, side="left")]

    def at(self, r: np.ndarray | float) -> np.ndarray:
        """Mass inside r counting particles exactly at r with half weight."""
        left = np.searchsorted(self.radii, r, side="left")
        right = np.searchsorted(self.radii, r, side="right")
        return self.prefix[left] + 0.5 * (self.prefix[right] - self.prefix[left])

    def half_self(self) -> np.ndarray:
        """Per sorted particle: mass of earlier particles plus half its own."""
        return self.prefix[:-1] + 0.5 * self.masses

    def smooth(self, r: np.ndarray | float) -> np.ndarray:
        """Piecewise-linear interpolation of the half-self mass, continuous in the radii."""
        return np.interp(r, self.radii, self.half_self(), left=0.0, right=self.total)

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Volume cells [lower_i, upper_i] holding each sorted particle.

        Interior edges sit at the volume midpoint r^3 = (r_{i-1}^3 + r_i^3) / 2 of
        neighbouring radii; the first cell starts at the center and the last ends on
        the outermost particle.
        """
        cubes = self.radii**3
        edges = np.zeros(self.radii.size + 1)
        edges[1:-1] = np.cbrt(0.5 * (cubes[:-1] + cubes[1:]))
        if self.radii.size:
            edges[-1] = self.radii[-1]
        return edges[:-1], edges[1:]


@dataclass(frozen=True)
class FieldSnapshot:
    """Radial field of a particle configuration on a grid.

    Attributes:
        grid (RadialGrid): Radial nodes.
        mass_profile (np.ndarray): M(r_j), nondecreasing, M(r_J) = total mass.
        density (np.ndarray): rho of the bin to the right of each node; 0 at r_J.
        potential (np.ndarray): u(r_j), vanishing at infinity.
        uprime (np.ndarray): gamma M(r_j) / r_j^2, 0 at the center.
        gamma (int): Coupling sign.
        total_mass (float): Exact ensemble mass.
        sup_force (float): Estimate of sup |u'| over particles and nodes.
        sup_density (float): Largest bin density.
        sup_potential (float): Largest |u| over nodes.
        max_r2_force (float): Largest r^2 |u'| over particles and nodes.
        t (float): Time of the configuration.
        support_bound (float): Recorded bound Q(0) + t P(t) on the support of the source.
    """

    grid: RadialGrid
    mass_profile: np.ndarray
    density: np.ndarray
    potential: np.ndarray
    uprime: np.ndarray
    gamma: int
    total_mass: float
    sup_force: float
    sup_density: float
    sup_potential: float
    max_r2_force: float
    t: float = 0.0
    support_bound: float = math.nan

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.grid.nodes,
                "M": self.mass_profile,
                "rho": self.density,
                "u": self.potential,
                "uprime": self.uprime,
            },
            columns=SNAPSHOT_COLUMNS,
        )


@dataclass(frozen=True)
class RadialDensity:
    """A radial density profile with a declared support radius."""

    density: Callable[[np.ndarray], np.ndarray]
    support_radius: float | None

    def __call__(self, r: np.ndarray | float) -> np.ndarray:
        return np.asarray(self.density(np.asarray(r, dtype=np.float64)), dtype=np.float64)


@dataclass(frozen=True)
class PointCloud:
    """Point masses in 3D with a declared support radius."""

    positions: np.ndarray
    masses: np.ndarray
    support_radius: float | None


@dataclass(frozen=True)
class VanishingSolution:
    """Potential vanishing at infinity evaluated by one or two solver paths."""

    points: np.ndarray
    convolution: np.ndarray
    radial: np.ndarray | None
    support_radius: float
    gamma: int

    @property
    def max_discrepancy(self) -> float:
        if self.radial is None:
            return math.nan
        return float(np.max(np.abs(self.radial - self.convolution), initial=0.0))


@dataclass(frozen=True)
class PotentialRepresentative:
    """A potential sampled on a radial grid with the claimed support of its source."""

    radii: np.ndarray
    potential: np.ndarray
    source_radius: float
    width: float = 0.0


@dataclass(frozen=True)
class VanishingConditions:
    cond_i: bool
    cond_ii: bool
    decay_constant: float
    max_laplacian_outside: float
