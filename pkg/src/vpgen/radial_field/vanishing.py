"""Potentials vanishing at infinity and the conditions that make them unique.

Two independent solvers are provided for a compactly supported source: a
radial quadrature of the enclosed-mass formula and a midpoint convolution with
the fundamental solution on a cubic lattice. Their agreement is the numerical
counterpart of uniqueness; `check_vanishing_conditions` detects representatives
that decay at infinity but whose Laplacian does not vanish outside the claimed
source support.
"""

__all__ = [
    "SELF_CELL_INTEGRAL",
    "check_vanishing_conditions",
    "plateau_representative",
    "radial_representative",
    "snapshot_representative",
    "solve_vanishing_at_infinity",
]

import logging
import math

import numpy as np
from scipy import integrate

from vpgen.radial_field.model import (
    FieldError,
    FieldSnapshot,
    PointCloud,
    PotentialRepresentative,
    RadialDensity,
    VanishingConditions,
    VanishingSolution,
)

logger = logging.getLogger(__name__)

# integral of 1/|x| over the unit cube centered at the origin
SELF_CELL_INTEGRAL = 3.0 * math.log(2.0 + math.sqrt(3.0)) - math.pi / 2.0

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
DEFAULT_SPACING = 0.02
DEFAULT_SUBSAMPLES = 3
LATTICE_CHUNK = 1 << 18


def _declared_support(source: RadialDensity | PointCloud) -> float:
    radius = source.support_radius
    if radius is None:
        raise FieldError(
            "Source support radius is undeclared; decay of the Laplacian cannot be certified"
        )
    if not (math.isfinite(radius) and radius >= 0):
        raise FieldError(f"Support radius must be finite and nonnegative, got {radius}")
    return float(radius)


def _as_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        # radii on the positive x-axis
        return np.column_stack([points, np.zeros_like(points), np.zeros_like(points)])
    if points.ndim != 2 or points.shape[1] != 3:
        raise FieldError(f"Evaluation points must be radii or an (k, 3) array, got {points.shape}")
    return points


def _quad(integrand, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    value, _ = integrate.quad(
        integrand, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200
    )
    return value


def _radial_potential(source: RadialDensity, radii: np.ndarray, gamma: int) -> np.ndarray:
    support = _declared_support(source)

    def density(s: float) -> float:
        return float(source(s))

    total = 4.0 * math.pi * _quad(lambda s: s * s * density(s), 0.0, support)
    potential = np.empty_like(radii)
    for j, r in enumerate(radii):
        if r >= support:
            potential[j] = -gamma * total / r if r > 0 else 0.0
            continue
        inner = 4.0 * math.pi * _quad(lambda s: s * s * density(s), 0.0, r) / r if r > 0 else 0.0
        outer = 4.0 * math.pi * _quad(lambda s: s * density(s), r, support)
        potential[j] = -gamma * (inner + outer)
    return potential


def _lattice_cells(
    source: RadialDensity, support: float, spacing: float, subsamples: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell centers, cell masses and cell-averaged densities of the nonempty cells."""
    k = int(math.ceil(support / spacing))
    axis = spacing * np.arange(-k, k + 1)
    centers = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    # cells whose closest point lies outside the support carry no mass
    half_diagonal = 0.5 * math.sqrt(3.0) * spacing
    centers = centers[np.linalg.norm(centers, axis=1) <= support + half_diagonal]

    offsets = spacing * ((np.arange(subsamples) + 0.5) / subsamples - 0.5)
    average = np.zeros(centers.shape[0])
    for dx in offsets:
        for dy in offsets:
            for dz in offsets:
                shifted = centers + np.array([dx, dy, dz])
                average += source(np.linalg.norm(shifted, axis=1))
    average /= subsamples**3
    keep = average > 0
    return centers[keep], average[keep] * spacing**3, average[keep]


def _lattice_potential(
    source: RadialDensity, points: np.ndarray, gamma: int, spacing: float, subsamples: int
) -> np.ndarray:
    support = _declared_support(source)
    if not spacing > 0:
        raise FieldError(f"Lattice spacing must be positive, got {spacing}")
    if subsamples < 1:
        raise FieldError(f"Need at least one subsample per cell axis, got {subsamples}")
    centers, masses, densities = _lattice_cells(source, support, spacing, subsamples)
    potential = np.zeros(points.shape[0])
    self_radius = 1e-6 * spacing
    for j, x in enumerate(points):
        total = 0.0
        for start in range(0, centers.shape[0], LATTICE_CHUNK):
            block = slice(start, start + LATTICE_CHUNK)
            distance = np.linalg.norm(centers[block] - x, axis=1)
            regular = distance >= self_radius
            total += float(np.sum(masses[block][regular] / distance[regular]))
            # exact integral of 1/|x - y| over a cell containing x at its center
            total += float(np.sum(densities[block][~regular])) * spacing**2 * SELF_CELL_INTEGRAL
        potential[j] = -gamma * total
    return potential


def _direct_potential(cloud: PointCloud, points: np.ndarray, gamma: int) -> np.ndarray:
    _declared_support(cloud)
    positions = np.asarray(cloud.positions, dtype=np.float64).reshape(-1, 3)
    masses = np.asarray(cloud.masses, dtype=np.float64)
    if masses.shape[0] != positions.shape[0]:
        raise FieldError(
            f"Point cloud has {positions.shape[0]} positions but {masses.shape[0]} masses"
        )
    potential = np.zeros(points.shape[0])
    for j, x in enumerate(points):
        distance = np.linalg.norm(positions - x, axis=1)
        # a source sitting on the evaluation point has no finite contribution
        positive = distance > 0
        potential[j] = -gamma * float(np.sum(masses[positive] / distance[positive]))
    return potential


def solve_vanishing_at_infinity(
    source: RadialDensity | PointCloud,
    points: np.ndarray,
    *,
    gamma: int = 1,
    spacing: float = DEFAULT_SPACING,
    subsamples: int = DEFAULT_SUBSAMPLES,
) -> VanishingSolution:
    """Solve Delta u = 4 pi gamma rho with u -> 0 at infinity at the given points.

    A `RadialDensity` is solved by both paths: adaptive radial quadrature of
    ``-gamma (M(r)/r + 4 pi int_r^R s rho(s) ds)`` and the lattice convolution
    ``-gamma sum_c rho_c h^3 / |x - y_c|``. Cell densities are averaged over
    ``subsamples**3`` interior points, and a cell centered on an evaluation
    point contributes its exact self-integral. A `PointCloud` is summed
    directly against the fundamental solution.

    Args:
        source (RadialDensity | PointCloud): Source with a declared support radius.
        points (np.ndarray): Radii (k,) placed on the x-axis, or positions (k, 3).
        gamma (int): Coupling sign.
        spacing (float): Lattice spacing h of the convolution path.
        subsamples (int): Subsamples per axis for cell-averaged densities.

    Raises:
        FieldError: If the support is undeclared or the inputs are malformed.

    Returns:
        The solution; ``radial`` is None for point clouds.
    """
    xyz = _as_points(points)
    if isinstance(source, PointCloud):
        convolution = _direct_potential(source, xyz, gamma)
        radial = None
    elif isinstance(source, RadialDensity):
        radii = np.linalg.norm(xyz, axis=1)
        radial = _radial_potential(source, radii, gamma)
        convolution = _lattice_potential(source, xyz, gamma, spacing, subsamples)
    else:
        raise FieldError(f"Unsupported source {type(source).__name__}")
    solution = VanishingSolution(
        points=xyz,
        convolution=convolution,
        radial=radial,
        support_radius=_declared_support(source),
        gamma=gamma,
    )
    logger.info(
        f"Solved vanishing potential at {xyz.shape[0]} points "
        f"(max discrepancy {solution.max_discrepancy:.3g})"
    )
    return solution


def radial_representative(
    source: RadialDensity, r_max: float, points: int = 2001, gamma: int = 1
) -> PotentialRepresentative:
    """Radial-quadrature potential of `source` on a uniform grid up to r_max."""
    support = _declared_support(source)
    if not r_max > support:
        raise FieldError(f"Grid end r_max={r_max} must lie past the support {support}")
    radii = np.linspace(0.0, r_max, points)
    return PotentialRepresentative(
        radii=radii,
        potential=_radial_potential(source, radii, gamma),
        source_radius=support,
    )


def snapshot_representative(snapshot: FieldSnapshot) -> PotentialRepresentative:
    """Potential of a field snapshot, claiming the first node that encloses all mass."""
    nodes = snapshot.grid.nodes
    enclosing = np.flatnonzero(snapshot.mass_profile >= snapshot.total_mass)
    claim = float(nodes[enclosing[0]]) if enclosing.size else snapshot.grid.r_max
    return PotentialRepresentative(radii=nodes, potential=snapshot.potential, source_radius=claim)


def _smooth_step(t: np.ndarray) -> np.ndarray:
    def psi(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        positive = x > 0
        out[positive] = np.exp(-1.0 / x[positive])
        return out

    rising, falling = psi(t), psi(1.0 - t)
    return rising / (rising + falling)


def plateau_representative(
    inner: float = 10.0, outer: float = 20.0, r_max: float = 50.0, points: int = 5001
) -> PotentialRepresentative:
    """The cutoff net: 1 inside `inner`, smoothly cut to 0 by `outer`, with a zero source claim.

    It decays at infinity but its Laplacian is nonzero on the cutoff shell, so it
    is not a solution vanishing at infinity of Delta u = 0.
    """
    if not 0 < inner < outer < r_max:
        raise FieldError(f"Need 0 < inner < outer < r_max, got {inner}, {outer}, {r_max}")
    radii = np.linspace(0.0, r_max, points)
    potential = 1.0 - _smooth_step((radii - inner) / (outer - inner))
    return PotentialRepresentative(radii=radii, potential=potential, source_radius=0.0)


def _radial_laplacian(radii: np.ndarray, u: np.ndarray) -> np.ndarray:
    # flux through face (r_j, r_{j+1}) uses r_j r_{j+1}, exact for u = c/r
    dr = np.diff(radii)
    flux = radii[:-1] * radii[1:] * np.diff(u) / dr
    laplacian = np.full_like(radii, np.nan)
    interior = radii[1:-1]
    laplacian[1:-1] = np.diff(flux) / (0.5 * (dr[:-1] + dr[1:])) / (interior * interior)
    return laplacian


def check_vanishing_conditions(
    representative: PotentialRepresentative, tolerance: float = 1e-6
) -> VanishingConditions:
    """Check decay of u and vanishing of its Laplacian outside the claimed support.

    The first condition holds when r |u(r)| is bounded and nonincreasing (to a
    relative `tolerance`) on the outer half of the grid beyond the claim. The
    second holds when the conservative radial Laplacian stays below `tolerance`
    at every node farther than two grid spacings plus the width from the claim.

    Args:
        representative (PotentialRepresentative): Potential on a radial grid.
        tolerance (float): Tolerance of both conditions.

    Returns:
        Both flags, the decay constant sup r |u| and the largest Laplacian outside.
    """
    radii = np.asarray(representative.radii, dtype=np.float64)
    u = np.asarray(representative.potential, dtype=np.float64)
    claim = representative.source_radius

    far = (radii >= max(claim, 0.5 * radii[-1])) & (radii > 0)
    decay = radii[far] * np.abs(u[far])
    decay_constant = float(np.max(decay, initial=0.0))
    cond_i = bool(
        decay.size >= 2
        and np.all(np.isfinite(decay))
        and np.all(np.diff(decay) <= tolerance * max(decay_constant, 1.0))
    )

    spacing = float(np.max(np.diff(radii)))
    laplacian = _radial_laplacian(radii, u)
    outside = (radii > claim + 2.0 * spacing + representative.width) & np.isfinite(laplacian)
    max_laplacian = float(np.max(np.abs(laplacian[outside]), initial=0.0))
    cond_ii = bool(np.any(outside) and max_laplacian <= tolerance)

    if cond_i and not cond_ii:
        logger.warning(
            f"Representative decays at infinity but its Laplacian reaches {max_laplacian:.3g} "
            f"outside the claimed support r={claim:g}"
        )
    return VanishingConditions(
        cond_i=cond_i,
        cond_ii=cond_ii,
        decay_constant=decay_constant,
        max_laplacian_outside=max_laplacian,
    )
