"""Enclosed mass, force, density and potential of a radial particle configuration.

All quantities are computed from a single sort of the particle radii. A
particle's own contribution to the mass enclosing it is half its weight, the
same convention used by the integrator and the shell oracle.
"""

__all__ = [
    "build_snapshot",
    "density_estimate",
    "force_at",
    "mass_profile",
    "min_bound_constant",
    "potential_profile",
    "smooth_mass_profile",
    "verify_key_estimate",
]

import math

import numpy as np

from vpgen.radial_field.model import (
    EnclosedMass,
    FieldError,
    FieldSnapshot,
    ParticleColumns,
    RadialGrid,
)


def _check_support(enclosed: EnclosedMass, grid: RadialGrid):
    if enclosed.radii.size and not grid.covers(float(enclosed.radii[-1])):
        raise FieldError(
            f"Particle support r={enclosed.radii[-1]:.6g} is not contained in the grid "
            f"(r_max={grid.r_max:.6g})"
        )


def mass_profile(particles: ParticleColumns, grid: RadialGrid) -> np.ndarray:
    """Enclosed mass M(r_j) = sum of m_i over r_i < r_j at every grid node.

    Args:
        particles (ParticleColumns): Particle radii and weights.
        grid (RadialGrid): Radial nodes.

    Returns:
        Nondecreasing array over the nodes; equals the exact total mass beyond the support.
    """
    return EnclosedMass.from_particles(particles).below(grid.nodes)


def smooth_mass_profile(particles: ParticleColumns, radii: np.ndarray) -> np.ndarray:
    return EnclosedMass.from_particles(particles).smooth(radii)


def force_at(
    particles: ParticleColumns, r: np.ndarray | float, gamma: int = 1
) -> np.ndarray:
    """Radial field u'(r) = gamma M(r) / r^2, zero at the center.

    Particles lying exactly at r contribute half their weight.
    """
    r = np.asarray(r, dtype=np.float64)
    enclosed = EnclosedMass.from_particles(particles).at(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        field = np.where(r > 0, gamma * enclosed / np.where(r > 0, r * r, 1.0), 0.0)
    return field


def _shell_volumes(grid: RadialGrid) -> np.ndarray:
    return 4.0 * math.pi / 3.0 * np.diff(grid.nodes**3)


def density_estimate(particles: ParticleColumns, grid: RadialGrid) -> np.ndarray:
    """Bin density (bin mass) / (4 pi/3 (r_{j+1}^3 - r_j^3)), reported at the left node.

    Raises:
        FieldError: If the particles are not inside the grid.

    Returns:
        Array over nodes; the last node (outside every bin) carries 0.
    """
    enclosed = EnclosedMass.from_particles(particles)
    _check_support(enclosed, grid)
    return _density_from_profile(enclosed.below(grid.nodes), grid)


def _density_from_profile(profile: np.ndarray, grid: RadialGrid) -> np.ndarray:
    density = np.zeros_like(grid.nodes)
    density[:-1] = np.diff(profile) / _shell_volumes(grid)
    return density


def _potential(enclosed: EnclosedMass, radii: np.ndarray, gamma: int) -> np.ndarray:
    # each particle's mass is spread at uniform density over its volume cell
    lower, upper = enclosed.cells()
    masses = enclosed.masses
    spread = lower**2 + lower * upper + upper**2
    # 4 pi int_a^b s rho ds over a whole cell; 1/r_i for a degenerate one
    weights = np.where(
        spread > 0, 1.5 * masses * (lower + upper) / np.where(spread > 0, spread, 1.0), 0.0
    )
    suffix = np.zeros(masses.size + 1)
    suffix[:-1] = np.cumsum(weights[::-1])[::-1]

    inside = np.searchsorted(upper, radii, side="left")
    outside = np.searchsorted(lower, radii, side="left")
    inner = enclosed.prefix[inside]
    outer = suffix[outside]
    split = outside > inside
    if np.any(split):
        cell = inside[split]
        r, a, b, m = radii[split], lower[cell], upper[cell], masses[cell]
        volume = b**3 - a**3
        inner[split] += m * (r**3 - a**3) / volume
        outer[split] += 1.5 * m * (b**2 - r**2) / volume
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(radii > 0, inner / np.where(radii > 0, radii, 1.0), 0.0)
    return -gamma * (inner + outer)


def potential_profile(
    particles: ParticleColumns, grid: RadialGrid, gamma: int = 1
) -> np.ndarray:
    """Potential u(r_j) = -gamma (M(r)/r + 4 pi int_r^inf s rho(s) ds), vanishing at infinity.

    The density is the particle mass spread uniformly over volume cells whose
    edges are the volume midpoints between neighbouring radii, the innermost
    cell reaching the center and the outermost ending on the last particle.
    Outside the particles the profile is exactly -gamma M / r, and its
    derivative between nodes is gamma M / r^2 of the cell density.

    Raises:
        FieldError: If the particles are not inside the grid.
    """
    enclosed = EnclosedMass.from_particles(particles)
    _check_support(enclosed, grid)
    return _potential(enclosed, grid.nodes, gamma)


def build_snapshot(
    particles: ParticleColumns,
    grid: RadialGrid,
    gamma: int = 1,
    t: float = 0.0,
    support_bound: float = math.nan,
) -> FieldSnapshot:
    """Compute the full radial field of a configuration on a grid.

    Args:
        particles (ParticleColumns): Particle radii and weights.
        grid (RadialGrid): Radial nodes covering the support.
        gamma (int): Coupling sign.
        t (float): Time stamp of the configuration.
        support_bound (float): Recorded support bound of the source at time t.

    Raises:
        FieldError: If the particles are not inside the grid.

    Returns:
        The field snapshot with its sup-norm diagnostics.
    """
    enclosed = EnclosedMass.from_particles(particles)
    _check_support(enclosed, grid)
    nodes = grid.nodes
    profile = enclosed.below(nodes)
    density = _density_from_profile(profile, grid)
    potential = _potential(enclosed, nodes, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        uprime = np.where(nodes > 0, gamma * profile / np.where(nodes > 0, nodes**2, 1.0), 0.0)
        positive = enclosed.radii > 0
        half = enclosed.half_self()[positive]
        particle_force = np.abs(gamma) * half / enclosed.radii[positive] ** 2
    sup_force = float(max(np.max(np.abs(uprime)), np.max(particle_force, initial=0.0)))
    max_r2_force = float(
        max(np.max(nodes**2 * np.abs(uprime)), abs(gamma) * np.max(half, initial=0.0))
    )
    return FieldSnapshot(
        grid=grid,
        mass_profile=profile,
        density=density,
        potential=potential,
        uprime=uprime,
        gamma=gamma,
        total_mass=enclosed.total,
        sup_force=sup_force,
        sup_density=float(density.max()),
        sup_potential=float(np.max(np.abs(potential))),
        max_r2_force=max_r2_force,
        t=t,
        support_bound=support_bound,
    )


def verify_key_estimate(snapshot: FieldSnapshot) -> float:
    """Dimensionless ratio sup|u'| / (M^(1/3) sup(rho)^(2/3)).

    Raises:
        FieldError: If the density vanishes.
    """
    if not snapshot.sup_density > 0:
        raise FieldError("Key estimate is undefined for zero density")
    return snapshot.sup_force / (
        snapshot.total_mass ** (1.0 / 3.0) * snapshot.sup_density ** (2.0 / 3.0)
    )


def min_bound_constant(snapshot: FieldSnapshot, velocity_support: float) -> float:
    """Smallest C with |u'(r)| <= C min(1/r^2, P^2) on the grid nodes."""
    nodes = snapshot.grid.nodes[1:]
    envelope = np.minimum(1.0 / nodes**2, velocity_support**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(envelope > 0, np.abs(snapshot.uprime[1:]) / envelope, 0.0)
    return float(np.max(ratio, initial=0.0))
