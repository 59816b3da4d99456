"""Exponent fits of sweep diagnostics against the mollification width."""

__all__ = [
    "LEMMA_BOUNDS",
    "fit_exponent",
    "fit_gronwall_law",
    "lemma_quantities",
    "verify_lemma1",
    "verify_lemma2_first_order",
]

import logging
import math
from collections.abc import Sequence

import numpy as np

from vpgen.asymptotics.model import (
    ExponentFit,
    FitError,
    GronwallFit,
    LemmaRow,
    LemmaTable,
    SweepResult,
    SweepRun,
    TangentFit,
)

logger = logging.getLogger(__name__)

MIN_PAIRS = 4
DEFAULT_TOLERANCE = 0.15

# growth exponents in 1/s of the zero order estimates
LEMMA_BOUNDS: dict[str, float] = {
    "f": 1.0,
    "f_measured": 1.0,
    "P": 1.0 / 3.0,
    "u": 4.0 / 3.0,
    "uprime": 4.0 / 3.0,
    "rho": 2.0,
    "Z": 1.0 / 3.0,
}
KEY_RATIO_BOUND = 0.0


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2 of y against x."""
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0:
        raise FitError("Fit abscissae are all equal")
    slope = float(np.dot(dx, dy)) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residual = y - (intercept + slope * x)
    total = float(np.dot(dy, dy))
    r2 = 1.0 if total == 0 else 1.0 - float(np.dot(residual, residual)) / total
    return slope, intercept, r2


def fit_exponent(
    widths: Sequence[float], values: Sequence[float], quantity: str = "q"
) -> ExponentFit:
    """Fit log q = intercept + slope log(1/s) over all pairs.

    Args:
        widths (Sequence[float]): Widths s_k, positive.
        values (Sequence[float]): Observed values q_k, positive.
        quantity (str): Label stored on the fit.

    Raises:
        FitError: With fewer than 4 pairs or nonpositive or non-finite data.

    Returns:
        The fit; the slope is the empirical growth exponent in 1/s.

    Example:
        ```python
        fit_exponent([1, 0.5, 0.25, 0.125], [1, 4, 16, 64]).slope  # 2.0
        ```
    """
    s = np.asarray(widths, dtype=np.float64)
    q = np.asarray(values, dtype=np.float64)
    if s.shape != q.shape or s.ndim != 1:
        raise FitError(f"Widths and values must be matching 1D sequences for {quantity}")
    if s.size < MIN_PAIRS:
        raise FitError(f"Need at least {MIN_PAIRS} pairs to fit {quantity}, got {s.size}")
    if not (np.all(np.isfinite(q)) and np.all(q > 0)):
        raise FitError(f"Values of {quantity} must be positive and finite, got {q.tolist()}")
    if not (np.all(np.isfinite(s)) and np.all(s > 0)):
        raise FitError(f"Widths must be positive and finite, got {s.tolist()}")
    slope, intercept, r2 = _line_fit(-np.log(s), np.log(q))
    return ExponentFit(
        quantity=quantity,
        widths=tuple(s.tolist()),
        values=tuple(q.tolist()),
        slope=slope,
        intercept=intercept,
        r2=r2,
    )


def lemma_quantities(run: SweepRun, t_star: float) -> dict[str, float]:
    """Values of the zero order quantities of one run at time t_star.

    f is the realized sup-norm cap (constant along the flow) and f_measured the
    binned phase-space sup of the initial particles; P, Z use the
    running sups at t_star; u, u' and rho are sups over [0, t_star].
    """
    metrics = run.metrics
    if metrics is None:
        return {}
    row = metrics.at_time(t_star)
    return {
        "f": run.fvalue_cap,
        "f_measured": run.fvalue_measured,
        "P": float(row["P"]),
        "u": metrics.sup_until("u_sup", t_star),
        "uprime": metrics.sup_until("force_sup", t_star),
        "rho": metrics.sup_until("rho_sup", t_star),
        "Z": math.hypot(float(row["P"]), float(row["Q"])),
        "key_ratio": metrics.sup_until("key_ratio", t_star),
    }


def _envelope_bounded(widths: np.ndarray, values: np.ndarray, bound: float, tol: float) -> bool:
    # ratio q s^bound must not grow faster than (1/s)^tol from the coarsest width
    order = np.argsort(-widths)
    s, q = widths[order], values[order]
    ratio = q * s**bound
    allowed = ratio[0] * (s[0] / s) ** tol
    return bool(np.all(ratio <= allowed * (1.0 + 1e-12)))


def _lemma_row(
    quantity: str, widths: list[float], values: list[float], bound: float, tolerance: float
) -> LemmaRow:
    s = np.asarray(widths)
    q = np.asarray(values)
    usable = np.isfinite(q) & (q > 0)
    if np.count_nonzero(usable) < MIN_PAIRS:
        logger.warning(f"Too few usable widths to fit {quantity}; leaving a gap in the table")
        return LemmaRow(quantity, math.nan, math.nan, math.nan, bound, None)
    fit = fit_exponent(s[usable], q[usable], quantity)
    passed = fit.slope <= bound + tolerance and _envelope_bounded(
        s[usable], q[usable], bound, tolerance
    )
    return LemmaRow(quantity, fit.slope, fit.intercept, fit.r2, bound, bool(passed))


def verify_lemma1(
    sweep: SweepResult, t_star: float | None = None, tolerance: float = DEFAULT_TOLERANCE
) -> LemmaTable:
    """Compare fitted growth exponents with the zero order bounds.

    Each quantity passes when its fitted exponent is at most bound + tolerance
    and its ratio to the bound law stays within a (1/s)^tolerance envelope of
    the coarsest width. A summary row for the key-estimate ratio uses bound 0.

    Args:
        sweep (SweepResult): Completed sweep.
        t_star (float | None): Evaluation time; defaults to 0.75 T.
        tolerance (float): Exponent tolerance.

    Raises:
        FitError: If t_star lies outside [0, T].

    Returns:
        The table; quantities with fewer than 4 usable widths are gaps (pass None).
    """
    T = sweep.spec.T
    t_star = 0.75 * T if t_star is None else t_star
    if not 0 <= t_star <= T:
        raise FitError(f"t_star={t_star} must lie in [0, {T}]")
    runs = sweep.successful
    per_run = [lemma_quantities(run, t_star) for run in runs]
    widths = [run.width for run in runs]
    bounds = dict(LEMMA_BOUNDS, key_ratio=KEY_RATIO_BOUND)
    rows = tuple(
        _lemma_row(name, widths, [values[name] for values in per_run], bound, tolerance)
        for name, bound in bounds.items()
    )
    table = LemmaTable(rows=rows, t_star=t_star, tolerance=tolerance)
    logger.info(f"Zero order estimates at t*={t_star:g}: passed={table.passed}")
    return table


def verify_lemma2_first_order(
    sweep: SweepResult,
    T: float | None = None,
    min_r2: float = 0.9,
    tolerance: float = 0.05,
) -> TangentFit:
    """Fit log(sup tangent norm at T) = intercept + C s^-2 across the sweep.

    The fit passes when C is finite, the line explains the data (r^2 >= min_r2)
    and the finest width lies no more than `tolerance` (relative) above the
    line, i.e. no super-exponential trend in s^-2.

    Raises:
        FitError: With fewer than 4 runs carrying tangent data.
    """
    T = sweep.spec.T if T is None else T
    widths, logs, invalid = [], [], 0.0
    for run in sweep.successful:
        metrics = run.metrics
        value = float(metrics.at_time(T)["tangent_sup"])
        if math.isfinite(value) and value > 0:
            widths.append(run.width)
            logs.append(math.log(value))
        invalid = max(invalid, metrics.max_invalid_fraction)
    if len(widths) < MIN_PAIRS:
        raise FitError(f"Need at least {MIN_PAIRS} runs with tangent data, got {len(widths)}")
    if invalid > 0.1:
        logger.warning(f"Tangent invalidated on up to {invalid:.1%} of particles in the sweep")
    x = np.asarray(widths) ** -2.0
    y = np.asarray(logs)
    C, intercept, r2 = _line_fit(x, y)
    residual = y - (intercept + C * x)
    finest = int(np.argmax(x))
    max_residual = float(np.max(np.abs(residual)))
    passed = bool(
        math.isfinite(C)
        and r2 >= min_r2
        and residual[finest] <= tolerance * max(1.0, abs(float(y[finest])))
    )
    return TangentFit(
        C=C,
        intercept=intercept,
        r2=r2,
        max_residual=max_residual,
        passed=passed,
        invalid_fraction=invalid,
    )


def fit_gronwall_law(
    widths: Sequence[float], amplifications: Sequence[float]
) -> GronwallFit:
    """Finite A, B >= 0 with amplification <= exp(A s^(-4/3) exp(B s^(-2))) at every width.

    B is the least-squares slope of log(log(amplification) s^(4/3)) against
    s^-2 (clamped at 0); A is then the smallest constant making the law an
    upper bound at every measured width.

    Raises:
        FitError: With mismatched, empty or negative data.
    """
    s = np.asarray(widths, dtype=np.float64)
    amp = np.asarray(amplifications, dtype=np.float64)
    if s.size == 0 or s.shape != amp.shape:
        raise FitError("Gronwall fit needs matching nonempty widths and amplifications")
    if np.any(~np.isfinite(amp)) or np.any(amp < 0) or np.any(s <= 0):
        raise FitError(f"Invalid amplification data {amp.tolist()} at widths {s.tolist()}")
    growth = np.log(np.maximum(amp, 1.0)) * s ** (4.0 / 3.0)
    positive = growth > 0
    B = 0.0
    if np.count_nonzero(positive) >= 2 and np.ptp(s[positive]) > 0:
        slope, _, _ = _line_fit(s[positive] ** -2.0, np.log(growth[positive]))
        # keep exp(-B s^-2) representable so A stays an upper bound
        B = min(max(0.0, slope), 700.0 / float(np.max(s**-2.0)))
    A = float(np.max(growth * np.exp(-B * s**-2.0), initial=0.0))
    return GronwallFit(
        A=A, B=B, widths=tuple(s.tolist()), amplifications=tuple(amp.tolist())
    )
