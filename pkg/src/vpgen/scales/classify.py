"""Membership tests for the scale classes."""

__all__ = [
    "LAMBDA_GRID",
    "VARIANT_2_CONSTANTS",
    "classify_scale",
    "validate_scale",
]

import logging
import math

import numpy as np

from vpgen.scales.model import MembershipReport, Scale, ScaleError

logger = logging.getLogger(__name__)

# lam = log|log eps|, from eps = 1e-1 far past eps = 1e-300 (lam ~ 6.5)
LAMBDA_GRID = np.geomspace(math.log(math.log(10.0)), 1e8, 4001)
LAMBDA_GRID.setflags(write=False)

VARIANT_2_CONSTANTS = (1.0, 10.0, 100.0)
CERTIFICATE_ROWS = 41


def validate_scale(scale: Scale):
    """Reject scales that do not decrease to zero on the sampling grid.

    Raises:
        ScaleError: If log(1/sigma) is not nondecreasing or never grows.
    """
    values = scale.log_inverse(LAMBDA_GRID)
    finite = values[np.isfinite(values)]
    if finite.size < 2 or np.any(np.diff(finite) < 0) or not finite[-1] > finite[0]:
        raise ScaleError(f"Scale {scale.name} does not decrease to 0 as eps -> 0")


def _is_bounded_above(values: np.ndarray) -> bool:
    if not np.all(np.isfinite(values)):
        return False
    split = (3 * values.size) // 4
    head, tail = values[:split], values[split:]
    atol = 1e-9 * (1.0 + abs(float(head.max())))
    return bool(tail.max() <= head.max() + atol and np.all(np.diff(tail) <= atol))


def _certificate(values: np.ndarray) -> tuple[tuple[float, float], ...]:
    index = np.unique(np.linspace(0, LAMBDA_GRID.size - 1, CERTIFICATE_ROWS).astype(int))
    return tuple((float(LAMBDA_GRID[i]), float(values[i])) for i in index)


def classify_scale(scale: Scale, p: float, variant: int) -> MembershipReport:
    """Test whether a scale belongs to the class of parameter p.

    Variant 1 checks that 1/sigma(eps) = O(|log eps|^(1/p)) through the log ratio
    ``log(1/sigma) - lam/p``. Variant 2 checks that exp(C sigma^-p) = O(|log eps|)
    for every C in `VARIANT_2_CONSTANTS` through ``C sigma^-p - lam``. Boundedness
    is judged on a geometric grid in ``lam = log|log eps|``: the tail of the
    sampled quantity must be nonincreasing and never exceed the earlier maximum.

    Args:
        scale (Scale): Scale to classify.
        p (float): Class parameter, positive.
        variant (int): 1 or 2.

    Raises:
        ScaleError: If p <= 0, the variant is unknown or the scale does not decrease to 0.

    Returns:
        The membership report. For variant 1 `max_value` is the largest sampled
        ratio; for variant 2 the largest sampled difference.
    """
    if not p > 0:
        raise ScaleError(f"Class parameter p must be positive, got {p}")
    if variant not in (1, 2):
        raise ScaleError(f"Variant must be 1 or 2, got {variant}")
    validate_scale(scale)

    log_inverse = scale.log_inverse(LAMBDA_GRID)
    if variant == 1:
        values = log_inverse - LAMBDA_GRID / p
        member = _is_bounded_above(values)
        max_value = math.exp(float(values.max())) if np.all(np.isfinite(values)) else math.inf
        certificate = _certificate(values)
    else:
        member = True
        max_value = -math.inf
        certificate = ()
        with np.errstate(over="ignore", invalid="ignore"):
            inverse_power = np.exp(p * log_inverse)
            for constant in VARIANT_2_CONSTANTS:
                values = constant * inverse_power - LAMBDA_GRID
                member = member and _is_bounded_above(values)
                max_value = max(max_value, float(np.nanmax(values)))
                # the largest constant is the hardest to bound; keep its table
                certificate = _certificate(values)
    logger.info(f"Scale {scale.name} variant {variant} p={p:g}: member={member}")
    return MembershipReport(
        member=member, variant=variant, p=float(p), max_value=max_value, certificate=certificate
    )
