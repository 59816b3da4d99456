"""Data models for regularization scales, singular data and particle ensembles.

Scales are evaluated in the doubly logarithmic variable ``lam = log|log eps|``
so that membership tests can reach widths far below what a floating-point
``eps`` could represent.
"""

__all__ = [
    "ColdDatum",
    "DatumError",
    "DensityProfile",
    "MembershipReport",
    "ParticleEnsemble",
    "Scale",
    "ScaleError",
    "ScaleFamily",
    "Shell",
    "ShellDatum",
    "SingularDatum",
    "SmoothDatum",
    "VelocityLaw",
    "iterated_log",
    "power_law",
    "power_of_log",
]

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TypeAlias

import numpy as np
import pandas as pd


class ScaleError(ValueError):
    pass


class DatumError(ValueError):
    pass


class ScaleFamily(StrEnum):
    POWER_OF_LOG = "power-of-log"
    ITERATED_LOG = "iterated-log"
    POWER_LAW = "power-law"


@dataclass(frozen=True)
class Scale:
    """A regularization-width law sigma(eps) with a closed form.

    Families:
        power-of-log:  sigma(eps) = min(1, |log eps|^(-1/p))
        iterated-log:  sigma(eps)^(-p) = max(1, (log|log eps|)^exponent)
        power-law:     sigma(eps) = eps^a

    Attributes:
        name (str): Human readable label used in reports.
        family (ScaleFamily): The closed-form family.
        p (float | None): Class parameter for the logarithmic families.
        exponent (float | None): Growth exponent of the iterated-log family.
        a (float | None): Power of eps for the power-law family.
    """

    name: str
    family: ScaleFamily
    p: float | None = None
    exponent: float | None = None
    a: float | None = None

    def __post_init__(self):
        if self.family in (ScaleFamily.POWER_OF_LOG, ScaleFamily.ITERATED_LOG):
            if self.p is None or not self.p > 0:
                raise ScaleError(f"Scale {self.name} requires p > 0, got {self.p}")
        if self.family == ScaleFamily.ITERATED_LOG and self.exponent is None:
            raise ScaleError(f"Scale {self.name} requires an exponent")
        if self.family == ScaleFamily.POWER_LAW:
            if self.a is None or not self.a > 0:
                raise ScaleError(f"Scale {self.name} requires a > 0, got {self.a}")

    def log_inverse(self, lam: np.ndarray | float) -> np.ndarray:
        """Evaluate log(1/sigma) as a function of lam = log|log eps|.

        Args:
            lam (np.ndarray | float): Doubly logarithmic width parameter.

        Returns:
            log(1/sigma), nonnegative. May be +inf for the power-law family at
            very large lam.
        """
        lam = np.asarray(lam, dtype=np.float64)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.family == ScaleFamily.POWER_OF_LOG:
                value = lam / self.p
            elif self.family == ScaleFamily.ITERATED_LOG:
                safe = np.where(lam > 1.0, lam, 1.0)
                value = (self.exponent / self.p) * np.log(safe)
            else:
                value = self.a * np.exp(lam)
        return np.maximum(value, 0.0)

    def sigma(self, eps: np.ndarray | float) -> np.ndarray:
        """Evaluate sigma(eps) for eps in (0, 1]."""
        eps = np.asarray(eps, dtype=np.float64)
        if np.any((eps <= 0) | (eps > 1)):
            raise ScaleError(f"eps must lie in (0, 1], got {eps}")
        with np.errstate(divide="ignore"):
            ell = -np.log(eps)
            lam = np.where(ell > 0, np.log(np.where(ell > 0, ell, 1.0)), -np.inf)
        return np.where(np.isfinite(lam), np.exp(-self.log_inverse(lam)), 1.0)


def power_of_log(p: float) -> Scale:
    return Scale(name=f"|log eps|^(-1/{p:g})", family=ScaleFamily.POWER_OF_LOG, p=p)


def iterated_log(p: float, exponent: float) -> Scale:
    return Scale(
        name=f"(log log 1/eps)^(-{exponent:g}/{p:g})",
        family=ScaleFamily.ITERATED_LOG,
        p=p,
        exponent=exponent,
    )


def power_law(a: float) -> Scale:
    return Scale(name=f"eps^{a:g}", family=ScaleFamily.POWER_LAW, a=a)


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of a scale-class membership test.

    Attributes:
        member (bool): Whether the sampled quantity stayed bounded.
        variant (int): 1 for the power-of-log class, 2 for the exponential class.
        p (float): Class parameter tested.
        max_value (float): Largest observed ratio (variant 1) or difference (variant 2).
        certificate (tuple[tuple[float, float], ...]): Thinned table of (lam, value) samples.
    """

    member: bool
    variant: int
    p: float
    max_value: float
    certificate: tuple[tuple[float, float], ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.certificate, columns=["lam", "value"])


class DensityProfile(StrEnum):
    UNIFORM = "uniform"
    PARABOLIC = "parabolic"


class VelocityLaw(StrEnum):
    ZERO = "zero"
    HUBBLE = "hubble"


def _check_gamma(gamma: int):
    if gamma not in (-1, 0, 1):
        raise DatumError(f"gamma must be one of -1, 0, 1, got {gamma}")


@dataclass(frozen=True)
class ColdDatum:
    """Monokinetic data f = rho0(r) delta(v - w0(r) e_r) on a ball of radius R."""

    mass: float = 1.0
    radius: float = 1.0
    profile: DensityProfile = DensityProfile.UNIFORM
    velocity: VelocityLaw = VelocityLaw.ZERO
    hubble_rate: float = 0.0
    gamma: int = 1

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise DatumError(f"Datum mass must be positive and finite, got {self.mass}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DatumError(f"Datum radius must be positive and finite, got {self.radius}")

    @property
    def density_peak(self) -> float:
        if self.profile == DensityProfile.UNIFORM:
            return 3.0 * self.mass / (4.0 * math.pi * self.radius**3)
        return 15.0 * self.mass / (8.0 * math.pi * self.radius**3)

    def density(self, r: np.ndarray | float) -> np.ndarray:
        x = np.asarray(r, dtype=np.float64) / self.radius
        inside = np.abs(x) <= 1.0
        if self.profile == DensityProfile.UNIFORM:
            return np.where(inside, self.density_peak, 0.0)
        return np.where(inside, self.density_peak * (1.0 - x * x), 0.0)

    def enclosed_mass(self, r: np.ndarray | float) -> np.ndarray:
        x = np.clip(np.asarray(r, dtype=np.float64) / self.radius, 0.0, 1.0)
        if self.profile == DensityProfile.UNIFORM:
            return self.mass * x**3
        return self.mass * (2.5 * x**3 - 1.5 * x**5)

    def radius_of_mass_fraction(self, q: np.ndarray) -> np.ndarray:
        """Invert the enclosed-mass fraction M(r)/M."""
        q = np.clip(np.asarray(q, dtype=np.float64), 0.0, 1.0)
        if self.profile == DensityProfile.UNIFORM:
            return self.radius * np.cbrt(q)
        x = np.linspace(0.0, 1.0, 65537)
        table = 2.5 * x**3 - 1.5 * x**5
        return self.radius * np.interp(q, table, x)

    def velocity_at(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.velocity == VelocityLaw.HUBBLE:
            return self.hubble_rate * r
        return np.zeros_like(r)


@dataclass(frozen=True)
class Shell:
    radius: float
    velocity: float
    mass: float


@dataclass(frozen=True)
class ShellDatum:
    """Finite sum of concentrated shells, the radial n-body data."""

    shells: tuple[Shell, ...]
    gamma: int = 1

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not self.shells:
            raise DatumError("Shell datum needs at least one shell")
        for shell in self.shells:
            if not shell.radius > 0:
                raise DatumError(f"Shell radii must be strictly positive, got {shell.radius}")
            if not (math.isfinite(shell.mass) and shell.mass > 0):
                raise DatumError(f"Shell masses must be positive and finite, got {shell.mass}")

    @property
    def mass(self) -> float:
        return math.fsum(shell.mass for shell in self.shells)


@dataclass(frozen=True)
class SmoothDatum:
    """Smooth compactly supported f = M K_R(|x|) K_V(|v|) built from 3D bumps."""

    mass: float = 1.0
    radius: float = 1.0
    velocity_radius: float = 1.0
    gamma: int = 1

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (self.mass > 0 and self.radius > 0 and self.velocity_radius > 0):
            raise DatumError(
                f"Smooth datum requires positive mass and radii, got {self.mass}, "
                f"{self.radius}, {self.velocity_radius}"
            )


SingularDatum: TypeAlias = ColdDatum | ShellDatum | SmoothDatum


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ParticleEnsemble:
    """Mollified, particle-sampled realization of a singular datum.

    Attributes:
        r (np.ndarray): Radii, nonnegative.
        vr (np.ndarray): Radial velocities.
        L (np.ndarray): Angular-momentum moduli, nonnegative.
        m (np.ndarray): Weights; ``math.fsum(m) == total_mass`` exactly.
        width (float): Realized mollification width s.
        fvalue_cap (float): Realized sup-norm bound of the mollified density.
        total_mass (float): Mass of the datum.
        kernel_width (float): Smallest kernel half-width used in the construction.
        resolution (float): Particles per kernel width.
        gamma (int): Sign of the coupling.
        ids (np.ndarray): Stable particle labels.
    """

    r: np.ndarray
    vr: np.ndarray
    L: np.ndarray
    m: np.ndarray
    width: float
    fvalue_cap: float
    total_mass: float
    kernel_width: float
    resolution: float
    gamma: int = 1
    ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("r", "vr", "L", "m"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = self.r.shape[0]
        if any(getattr(self, name).shape != (n,) for name in ("vr", "L", "m")):
            raise DatumError("Particle columns must be one dimensional and of equal length")
        ids = np.arange(n, dtype=np.int64) if self.ids is None else np.asarray(self.ids)
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def under_resolved(self) -> bool:
        return self.resolution < 8

    def take(self, order: np.ndarray) -> "ParticleEnsemble":
        """Return the same particles in a different order."""
        return ParticleEnsemble(
            r=self.r[order],
            vr=self.vr[order],
            L=self.L[order],
            m=self.m[order],
            width=self.width,
            fvalue_cap=self.fvalue_cap,
            total_mass=self.total_mass,
            kernel_width=self.kernel_width,
            resolution=self.resolution,
            gamma=self.gamma,
            ids=self.ids[order],
        )

    def scaled_mass(self, factor: float) -> "ParticleEnsemble":
        return ParticleEnsemble(
            r=self.r,
            vr=self.vr,
            L=self.L,
            m=self.m * factor,
            width=self.width,
            fvalue_cap=self.fvalue_cap * factor,
            total_mass=math.fsum(self.m * factor),
            kernel_width=self.kernel_width,
            resolution=self.resolution,
            gamma=self.gamma,
            ids=self.ids,
        )
