"""Compactly supported bump mollifiers in one and three dimensions."""

__all__ = [
    "MollifierKernel",
    "bump_kernel",
    "bump_profile",
    "normalization_constant",
    "peak_coefficient",
]

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from vpgen.scales.model import ScaleError

QUAD_TOLERANCE = 1e-14
SAMPLING_TABLE_SIZE = 8193


def bump_profile(t: np.ndarray | float) -> np.ndarray:
    """The standard bump exp(-1/(1 - t^2)) on (-1, 1), zero elsewhere."""
    t = np.asarray(t, dtype=np.float64)
    t2 = np.atleast_1d(t * t)
    inside = t2 < 1.0
    out = np.zeros_like(t2)
    out[inside] = np.exp(-1.0 / (1.0 - t2[inside]))
    return out.reshape(t.shape)


def _bump_scalar(t: float) -> float:
    if t * t >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - t * t))


def _bump_derivative_scalar(t: float) -> float:
    if t * t >= 1.0:
        return 0.0
    return -2.0 * t / (1.0 - t * t) ** 2 * math.exp(-1.0 / (1.0 - t * t))


@lru_cache(maxsize=None)
def normalization_constant(dimension: int) -> float:
    """Integral of the unit-width bump over R^dimension."""
    if dimension == 1:
        value, _ = integrate.quad(
            _bump_scalar, -1.0, 1.0, epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE
        )
        return value
    if dimension == 3:
        value, _ = integrate.quad(
            lambda t: t * t * _bump_scalar(t),
            0.0,
            1.0,
            epsabs=QUAD_TOLERANCE,
            epsrel=QUAD_TOLERANCE,
        )
        return 4.0 * math.pi * value
    raise ScaleError(f"Kernel dimension must be 1 or 3, got {dimension}")


def peak_coefficient(dimension: int) -> float:
    """Peak value of the unit-width normalized kernel, exp(-1) / c_d."""
    return math.exp(-1.0) / normalization_constant(dimension)


@lru_cache(maxsize=None)
def _quantile_table(dimension: int) -> tuple[np.ndarray, np.ndarray]:
    # 1D: signed coordinate on [-1, 1]. 3D: radius on [0, 1] with weight 4 pi t^2.
    if dimension == 1:
        t = np.linspace(-1.0, 1.0, SAMPLING_TABLE_SIZE)
        density = bump_profile(t)
    else:
        t = np.linspace(0.0, 1.0, SAMPLING_TABLE_SIZE)
        density = t * t * bump_profile(t)
    cdf = integrate.cumulative_trapezoid(density, t, initial=0.0)
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    t.setflags(write=False)
    return cdf, t


@lru_cache(maxsize=None)
def _derivative_peak_unit(dimension: int) -> float:
    result = optimize.minimize_scalar(
        lambda t: -abs(_bump_derivative_scalar(t)),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return abs(_bump_derivative_scalar(float(result.x))) / normalization_constant(dimension)


@dataclass(frozen=True)
class MollifierKernel:
    """Normalized bump kernel of a given half-width.

    The one dimensional kernel acts on a signed coordinate; the three
    dimensional kernel is radial and normalized over the 3-ball.

    Attributes:
        width (float): Support half-width.
        dimension (int): 1 or 3.
    """

    width: float
    dimension: int

    def __post_init__(self):
        if not self.width > 0:
            raise ScaleError(f"Kernel width must be positive, got {self.width}")
        if self.dimension not in (1, 3):
            raise ScaleError(f"Kernel dimension must be 1 or 3, got {self.dimension}")

    @property
    def normalization(self) -> float:
        return normalization_constant(self.dimension) * self.width**self.dimension

    @property
    def peak(self) -> float:
        return math.exp(-1.0) / self.normalization

    @property
    def derivative_peak(self) -> float:
        """Analytic sup of the kernel gradient modulus."""
        return _derivative_peak_unit(self.dimension) / self.width ** (self.dimension + 1)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        return bump_profile(np.abs(np.asarray(x, dtype=np.float64)) / self.width) / (
            self.normalization
        )

    def integral(self) -> float:
        """Integral of the kernel by adaptive quadrature."""
        norm, width = self.normalization, self.width
        if self.dimension == 1:
            value, _ = integrate.quad(
                lambda x: _bump_scalar(x / width) / norm,
                -width,
                width,
                epsabs=QUAD_TOLERANCE,
                epsrel=QUAD_TOLERANCE,
            )
            return value
        value, _ = integrate.quad(
            lambda r: 4.0 * math.pi * r * r * _bump_scalar(r / width) / norm,
            0.0,
            self.width,
            epsabs=QUAD_TOLERANCE,
            epsrel=QUAD_TOLERANCE,
        )
        return value

    def quantile(self, u: np.ndarray | float) -> np.ndarray:
        """Map uniforms in [0, 1] to kernel-distributed offsets.

        For dimension 1 the result is a signed offset; for dimension 3 it is
        the modulus of a velocity offset.
        """
        cdf, t = _quantile_table(self.dimension)
        return self.width * np.interp(np.asarray(u, dtype=np.float64), cdf, t)


def bump_kernel(width: float, dimension: int) -> MollifierKernel:
    """Build the normalized bump kernel exp(-1/(1 - t^2)) at the given width.

    Args:
        width (float): Support half-width, positive.
        dimension (int): 1 for a radial-coordinate kernel, 3 for a velocity-space kernel.

    Returns:
        The kernel, nonnegative with unit integral and support in the closed ball of `width`.

    Example:
        ```python
        kernel = bump_kernel(0.5, 1)
        kernel(0.5)  # 0.0
        ```
    """
    return MollifierKernel(width=width, dimension=dimension)
