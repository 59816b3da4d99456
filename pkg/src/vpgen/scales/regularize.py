"""Mollified particle realizations of singular data."""

__all__ = [
    "CONSTRUCTION_CONSTANT",
    "DatumNorms",
    "construction_constant",
    "datum_norms",
    "partition_mass",
    "regularize",
    "speeds",
]

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from vpgen.radial_field.model import RadialGrid
from vpgen.scales.kernels import bump_kernel, normalization_constant, peak_coefficient
from vpgen.scales.model import (
    ColdDatum,
    DatumError,
    ParticleEnsemble,
    ShellDatum,
    SingularDatum,
    SmoothDatum,
)

logger = logging.getLogger(__name__)

# twice the peak of the unit 3D kernel
CONSTRUCTION_CONSTANT = 2.0 * peak_coefficient(3)

MIN_PARTICLES_PER_WIDTH = 8
SHELL_PROFILE_POINTS = 4001


def construction_constant(datum: SingularDatum) -> float:
    """Constant C of the sup-norm budget fvalue_cap <= C / s for s in (0, 1].

    Each shell is mollified to a peak of at most CONSTRUCTION_CONSTANT / (2 s);
    overlapping shells add up, so k shells use max(1, k / 2) CONSTRUCTION_CONSTANT. A cold
    datum mollified at w_v = (s / rho_peak)^(1/3) peaks at
    peak_coefficient(3) rho_peak^2 / s, so its constant grows with rho_peak^2
    past rho_peak = 1. A smooth datum does not depend on s.
    """
    if isinstance(datum, ColdDatum):
        return CONSTRUCTION_CONSTANT * max(1.0, datum.density_peak**2)
    if isinstance(datum, SmoothDatum):
        peak = (
            datum.mass
            * bump_kernel(datum.radius, 3).peak
            * bump_kernel(datum.velocity_radius, 3).peak
        )
        return max(CONSTRUCTION_CONSTANT, peak)
    return CONSTRUCTION_CONSTANT * max(1.0, len(datum.shells) / 2.0)


def partition_mass(total: float, n: int) -> np.ndarray:
    """Split `total` into `n` nearly equal weights whose exact sum is `total`.

    Every weight is an integer multiple of a common power-of-two quantum, so
    ``math.fsum(weights) == total`` holds without rounding.

    Args:
        total (float): Positive finite mass.
        n (int): Number of weights, at least 1.

    Returns:
        Array of `n` positive weights, differing by at most one quantum.
    """
    if not (math.isfinite(total) and total > 0):
        raise DatumError(f"Mass must be positive and finite, got {total}")
    if n < 1:
        raise DatumError(f"Need at least one particle, got {n}")
    exponent = math.frexp(total / n)[1] - 53
    quanta = int(math.ldexp(total, -exponent))
    base, remainder = divmod(quanta, n)
    counts = np.full(n, float(base))
    counts[:remainder] += 1.0
    return np.ldexp(counts, exponent)


def _uniforms(seed: int, n: int, columns: int) -> np.ndarray:
    # Philox is counter based: row i depends only on (seed, i)
    generator = np.random.Generator(np.random.Philox(key=seed))
    return generator.random((n, columns))


def _isotropic(speed: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = 2.0 * u - 1.0
    return speed * mu, speed * np.sqrt(np.clip(1.0 - mu * mu, 0.0, 1.0))


def _regularize_cold(
    datum: ColdDatum, s: float, n: int, seed: int, zero_spread: bool
) -> ParticleEnsemble:
    draws = _uniforms(seed, n, 3)
    q = (np.arange(n) + draws[:, 0]) / n
    r = datum.radius_of_mass_fraction(q)
    if zero_spread:
        width, cap, resolution = 0.0, math.inf, float(n)
        offset_r = np.zeros(n)
        offset_t = np.zeros(n)
    else:
        width = (s / datum.density_peak) ** (1.0 / 3.0)
        kernel = bump_kernel(width, 3)
        cap = datum.density_peak * kernel.peak
        resolution = n * min(1.0, width / datum.radius)
        offset_r, offset_t = _isotropic(kernel.quantile(draws[:, 1]), draws[:, 2])
    return ParticleEnsemble(
        r=r,
        vr=datum.velocity_at(r) + offset_r,
        L=r * offset_t,
        m=partition_mass(datum.mass, n),
        width=s,
        fvalue_cap=cap,
        total_mass=datum.mass,
        kernel_width=width,
        resolution=resolution,
        gamma=datum.gamma,
    )


def _shell_counts(datum: ShellDatum, n: int) -> np.ndarray:
    k = len(datum.shells)
    if n < k:
        raise DatumError(f"Need at least one particle per shell ({k}), got {n}")
    masses = np.array([shell.mass for shell in datum.shells])
    ideal = n * masses / masses.sum()
    counts = np.maximum(np.floor(ideal).astype(int), 1)
    # largest remainder, ties by shell order
    order = np.argsort(-(ideal - np.floor(ideal)), kind="stable")
    i = 0
    while counts.sum() < n:
        counts[order[i % k]] += 1
        i += 1
    while counts.sum() > n:
        j = int(np.argmax(counts))
        counts[j] -= 1
    return counts


def _shell_width(radius: float, mass: float, s: float) -> float:
    """Common r/v half-width so the peak of the mollified shell equals A/s.

    Solves (r - w)^2 w^4 = s m e^-1 / (4 pi c_1) on (0, 2r/3], where the left
    side is increasing.
    """
    target = s * mass * math.exp(-1.0) / (4.0 * math.pi * normalization_constant(1))
    upper = 2.0 * radius / 3.0
    if (radius - upper) ** 2 * upper**4 < target:
        raise DatumError(
            f"Mollified shell at r={radius:g} with mass {mass:g} would touch the origin "
            f"at width s={s:g}"
        )
    return optimize.brentq(
        lambda w: (radius - w) ** 2 * w**4 - target, 0.0, upper, xtol=1e-15, rtol=1e-14
    )


def _regularize_shells(datum: ShellDatum, s: float, n: int, seed: int) -> ParticleEnsemble:
    counts = _shell_counts(datum, n)
    draws = _uniforms(seed, n, 3)
    widths = np.array([_shell_width(sh.radius, sh.mass, s) for sh in datum.shells])

    radii, velocities, momenta, weights = [], [], [], []
    start = 0
    for shell, count, width in zip(datum.shells, counts, widths):
        block = draws[start : start + count]
        start += count
        radial = bump_kernel(width, 1)
        velocity = bump_kernel(width, 3)
        r = shell.radius + radial.quantile((np.arange(count) + block[:, 0]) / count)
        offset_r, offset_t = _isotropic(velocity.quantile(block[:, 1]), block[:, 2])
        radii.append(r)
        velocities.append(shell.velocity + offset_r)
        momenta.append(r * offset_t)
        weights.append(partition_mass(shell.mass, int(count)))

    lo = min(sh.radius - w for sh, w in zip(datum.shells, widths))
    hi = max(sh.radius + w for sh, w in zip(datum.shells, widths))
    grid = np.linspace(lo, hi, SHELL_PROFILE_POINTS)
    profile = np.zeros_like(grid)
    for shell, width in zip(datum.shells, widths):
        radial = bump_kernel(width, 1)
        profile += shell.mass * radial(grid - shell.radius) * bump_kernel(width, 3).peak
    cap = float(np.max(profile / (4.0 * math.pi * grid * grid)))

    return ParticleEnsemble(
        r=np.concatenate(radii),
        vr=np.concatenate(velocities),
        L=np.concatenate(momenta),
        m=np.concatenate(weights),
        width=s,
        fvalue_cap=cap,
        total_mass=datum.mass,
        kernel_width=float(widths.min()),
        resolution=float(counts.min()),
        gamma=datum.gamma,
    )


def _regularize_smooth(datum: SmoothDatum, s: float, n: int, seed: int) -> ParticleEnsemble:
    draws = _uniforms(seed, n, 3)
    space = bump_kernel(datum.radius, 3)
    velocity = bump_kernel(datum.velocity_radius, 3)
    r = space.quantile((np.arange(n) + draws[:, 0]) / n)
    offset_r, offset_t = _isotropic(velocity.quantile(draws[:, 1]), draws[:, 2])
    return ParticleEnsemble(
        r=r,
        vr=offset_r,
        L=r * offset_t,
        m=partition_mass(datum.mass, n),
        width=s,
        fvalue_cap=datum.mass * space.peak * velocity.peak,
        total_mass=datum.mass,
        kernel_width=min(datum.radius, datum.velocity_radius),
        resolution=float(n),
        gamma=datum.gamma,
    )


def regularize(
    datum: SingularDatum, s: float, n_particles: int, seed: int, zero_spread: bool = False
) -> ParticleEnsemble:
    """Mollify a singular datum at width s and sample it with equal-mass strata.

    Cold data get a 3D velocity kernel of width (s / max rho0)^(1/3); shells get a
    common radial and velocity width solving the sup-norm budget including the
    1/(4 pi r^2) factor; smooth data are sampled as given.

    Args:
        datum (SingularDatum): The idealized initial datum.
        s (float): Mollification width in (0, 1].
        n_particles (int): Number of particles, at least 1.
        seed (int): Key of the counter-based generator.
        zero_spread (bool): Cold data only; drop the velocity kernel (diagnostic mode).

    Raises:
        DatumError: For invalid widths or counts, or shells that would touch the origin.

    Returns:
        The particle ensemble. Weights sum exactly to the datum mass.
    """
    if not 0 < s <= 1:
        raise DatumError(f"Width s must lie in (0, 1], got {s}")
    if n_particles < 1:
        raise DatumError(f"Need at least one particle, got {n_particles}")
    if isinstance(datum, ColdDatum):
        ensemble = _regularize_cold(datum, s, n_particles, seed, zero_spread)
    elif isinstance(datum, ShellDatum):
        ensemble = _regularize_shells(datum, s, n_particles, seed)
    elif isinstance(datum, SmoothDatum):
        ensemble = _regularize_smooth(datum, s, n_particles, seed)
    else:
        raise DatumError(f"Unsupported datum {datum!r}")
    if ensemble.under_resolved:
        logger.warning(
            f"Ensemble at s={s:g} resolves the kernel with {ensemble.resolution:.3g} "
            f"particles per width (< {MIN_PARTICLES_PER_WIDTH})"
        )
    return ensemble


@dataclass(frozen=True)
class DatumNorms:
    l1: float
    linf_f: float
    r_max: float
    v_max: float


def speeds(ensemble: ParticleEnsemble) -> np.ndarray:
    r = ensemble.r
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(r > 0, ensemble.L / np.where(r > 0, r, 1.0), 0.0)
    return np.sqrt(ensemble.vr**2 + tangential**2)


def datum_norms(
    ensemble: ParticleEnsemble, grid: RadialGrid, velocity_bins: int = 16
) -> DatumNorms:
    """Mass, sup-norm estimate and support radii of a particle ensemble.

    The sup-norm of f is estimated by binning particles in (r, |v|) with bins
    equal-volume in |v|^3 up to the largest speed; each bin's mass is divided by
    its phase-space volume (4 pi/3 dr^3) (4 pi/3 dw^3).

    Args:
        ensemble (ParticleEnsemble): Particles to measure.
        grid (RadialGrid): Radial bins, covering the spatial support.
        velocity_bins (int): Number of speed bins.

    Returns:
        The norms; ``l1`` is exactly the ensemble mass.
    """
    w = speeds(ensemble)
    r_max = float(ensemble.r.max())
    v_max = float(w.max())
    if v_max == 0:
        linf = math.inf
    else:
        velocity_edges = v_max * np.cbrt(np.linspace(0.0, 1.0, velocity_bins + 1))
        mass, _, _ = np.histogram2d(
            ensemble.r, w, bins=[grid.nodes, velocity_edges], weights=ensemble.m
        )
        volume = np.outer(
            4.0 * math.pi / 3.0 * np.diff(grid.nodes**3),
            4.0 * math.pi / 3.0 * np.diff(velocity_edges**3),
        )
        linf = float(np.max(mass / volume))
    return DatumNorms(l1=math.fsum(ensemble.m), linf_f=linf, r_max=r_max, v_max=v_max)
