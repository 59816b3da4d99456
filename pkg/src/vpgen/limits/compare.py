"""Convergence of regularized runs toward their singular-limit oracles."""

__all__ = [
    "DEFAULT_OBSERVABLES",
    "ObservableRecorder",
    "collapse_time",
    "compare",
    "compare_sweep",
    "oracle_for",
    "recorded_run",
]

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import replace

import numpy as np
import pandas as pd

from vpgen.asymptotics.model import SweepRun, SweepSpec
from vpgen.asymptotics.sweep import regularized_run
from vpgen.dynamics.model import SimState
from vpgen.limits.model import (
    COMPARISON_COLUMNS,
    PROFILE_BINS,
    ObservableSeries,
    OracleError,
    OracleTrajectory,
)
from vpgen.limits.oracles import (
    DEFAULT_LABELS,
    DEFAULT_ORACLE_RATIO,
    cold_euler_oracle,
    shell_oracle,
)
from vpgen.radial_field.model import FieldSnapshot
from vpgen.scales.model import ColdDatum, ShellDatum, SingularDatum

logger = logging.getLogger(__name__)

DEFAULT_OBSERVABLES = ("r10", "r50", "r90", "vr_profile")


class ObservableRecorder:
    """Run observer collecting mass-quantile radii and the velocity profile at every sample."""

    def __init__(self, bins: int = PROFILE_BINS):
        self.bins = bins
        self.series = ObservableSeries()

    def __call__(self, state: SimState, snapshot: FieldSnapshot):
        self.series.append(state.t, state.r, state.vr, state.m, self.bins)


def recorded_run(
    spec: SweepSpec, s: float, bins: int = PROFILE_BINS
) -> tuple[SweepRun, ObservableSeries]:
    recorder = ObservableRecorder(bins)
    run = regularized_run(spec, s, observer=recorder)
    return run, recorder.series


def oracle_for(
    datum: SingularDatum,
    T: float,
    dt: float,
    *,
    gamma: int | None = None,
    ratio: int = DEFAULT_ORACLE_RATIO,
    labels: int = DEFAULT_LABELS,
) -> OracleTrajectory:
    """Limit-system trajectory of a cold or shell datum.

    Args:
        datum (SingularDatum): Cold or shell datum.
        T (float): Horizon.
        dt (float): Particle-run step the oracle substeps are derived from.
        gamma (int | None): Coupling override, the datum's own when None.
        ratio (int): Oracle substeps per particle step.
        labels (int): Lagrangian labels of the cold oracle.

    Raises:
        OracleError: For data with no singular limit system.
    """
    gamma = datum.gamma if gamma is None else gamma
    if isinstance(datum, ColdDatum):
        return cold_euler_oracle(replace(datum, gamma=gamma), T, dt, labels=labels, ratio=ratio)
    if isinstance(datum, ShellDatum):
        return shell_oracle(datum, gamma, T, dt, ratio=ratio)
    raise OracleError(f"No limit oracle for datum of type {type(datum).__name__}")


def _interpolate(times: np.ndarray, source_times: np.ndarray, values: np.ndarray) -> np.ndarray:
    if values.ndim == 1:
        return np.interp(times, source_times, values)
    return np.column_stack(
        [np.interp(times, source_times, values[:, j]) for j in range(values.shape[1])]
    )


def compare(
    vp_series: ObservableSeries,
    oracle_series: ObservableSeries,
    observables: Iterable[str] = DEFAULT_OBSERVABLES,
    horizon: float | None = None,
) -> dict[str, float]:
    """Sup over sampled times of the absolute differences of each observable.

    Oracle values are interpolated linearly onto the run's sample times.
    Samples past the horizon (by default the oracle's) are dropped with a
    warning. Empty profile bins are ignored.

    Returns:
        Mapping from observable name to its sup error.
    """
    limit = oracle_series.horizon if horizon is None else horizon
    limit = min(limit, oracle_series.times[-1])
    times = np.asarray(vp_series.times)
    keep = times <= limit + 1e-12
    if not keep.all():
        logger.warning(
            f"Comparison truncated at the oracle horizon t={limit:.6g}; "
            f"{int((~keep).sum())} later sample(s) dropped"
        )
    if not keep.any():
        raise OracleError(f"No run samples before the oracle horizon t={limit:.6g}")
    source_times = np.asarray(oracle_series.times)
    errors = {}
    for name in observables:
        vp_values = vp_series.values(name)[keep]
        oracle_values = _interpolate(times[keep], source_times, oracle_series.values(name))
        difference = np.abs(vp_values - oracle_values)
        difference = difference[np.isfinite(difference)]
        errors[name] = float(difference.max()) if difference.size else math.nan
    return errors


def compare_sweep(
    series_by_width: Mapping[float, ObservableSeries],
    oracle_series: ObservableSeries,
    observables: Sequence[str] = DEFAULT_OBSERVABLES,
    horizon: float | None = None,
) -> pd.DataFrame:
    """Long table of per-width errors, one row per (s, observable), widths descending."""
    rows = []
    for s in sorted(series_by_width, reverse=True):
        errors = compare(series_by_width[s], oracle_series, observables, horizon)
        rows.extend({"s": s, "observable": name, "error": errors[name]} for name in observables)
    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)


def collapse_time(series: ObservableSeries) -> float:
    """Sampled time of the minimum 90%-mass radius."""
    if not series.times:
        return math.nan
    return float(series.times[int(np.argmin(series.r90))])
