"""Summary tables of sweep outputs, computed after the fact or at the end of a sweep."""

__all__ = [
    "ReportHandler",
    "load_sweep",
    "summarize_sweep",
]

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from vpgen.asymptotics.fitting import fit_exponent, verify_lemma1, verify_lemma2_first_order
from vpgen.asymptotics.model import (
    SUMMARY_COLUMNS,
    FitError,
    RunStatus,
    SweepResult,
    SweepRun,
    metrics_filename,
)
from vpgen.dynamics.model import RunMetrics
from vpgen.handlers.base import ConfiguredHandler
from vpgen.handlers.model import ExperimentConfig, ExperimentResponse

logger = logging.getLogger(__name__)

SUMMARY_FILENAME = "summary.csv"
RUNS_FILENAME = "runs.csv"
COMPARISON_FILENAME = "comparison.csv"
CONVERGENCE_FILENAME = "convergence.csv"


def load_sweep(config: ExperimentConfig, output_dir: Path) -> SweepResult:
    """Rebuild a sweep result from runs.csv and the metrics_s<width>.csv files.

    Raises:
        FileNotFoundError: If runs.csv is missing.
    """
    runs_path = output_dir / RUNS_FILENAME
    if not runs_path.is_file():
        raise FileNotFoundError(f"No {RUNS_FILENAME} in {output_dir}")
    runs = []
    for row in pd.read_csv(runs_path).itertuples(index=False):
        width = float(row.s)
        run = SweepRun(
            width=width,
            n_particles=int(row.n_particles),
            dt=float(row.dt),
            fvalue_cap=float(row.fvalue_cap),
            fvalue_measured=float(getattr(row, "fvalue_measured", math.nan)),
            status=RunStatus(row.status),
        )
        path = output_dir / metrics_filename(width)
        if path.is_file():
            run.metrics = RunMetrics.from_csv(path, dt=run.dt, width=width)
        runs.append(run)
    runs.sort(key=lambda run: run.width)
    spec = config.to_sweep_spec(widths=sorted((run.width for run in runs), reverse=True))
    failures = [
        {"width": run.width, "error": "failed"} for run in runs if run.status == RunStatus.FAILED
    ]
    return SweepResult(spec=spec, runs=runs, failures=failures)


def summarize_sweep(
    result: SweepResult, config: ExperimentConfig
) -> tuple[pd.DataFrame, dict[str, Any]]:
    """Zero order estimate table plus the first order tangent row.

    The tangent row reports C as its slope and leaves the bound blank; it is
    omitted when fewer than four runs carry tangent data.
    """
    table = verify_lemma1(result, config.t_star, config.tolerance)
    frame = table.to_frame()
    summary: dict[str, Any] = {"zero_order_passed": table.passed, "t_star": table.t_star}
    try:
        tangent = verify_lemma2_first_order(result)
    except FitError as e:
        logger.warning(f"No first order fit: {e}")
    else:
        row = {
            "quantity": "tangent_C",
            "slope": tangent.C,
            "intercept": tangent.intercept,
            "r2": tangent.r2,
            "bound": math.nan,
            "pass": tangent.passed,
        }
        frame = pd.concat([frame, pd.DataFrame([row], columns=SUMMARY_COLUMNS)], ignore_index=True)
        summary.update(
            tangent_C=tangent.C,
            tangent_r2=tangent.r2,
            first_order_passed=tangent.passed,
            invalid_fraction=tangent.invalid_fraction,
        )
    return frame, summary


def convergence_orders(comparison: pd.DataFrame) -> pd.DataFrame:
    """Fitted order of each observable's error in s, from an "s,observable,error" table."""
    rows = []
    for name, group in comparison.groupby("observable", sort=True):
        s = group["s"].to_numpy(dtype=np.float64)
        error = group["error"].to_numpy(dtype=np.float64)
        usable = np.isfinite(error) & (error > 0)
        try:
            fit = fit_exponent(s[usable], error[usable], str(name))
        except FitError as e:
            logger.warning(f"No convergence order for {name}: {e}")
            rows.append({"observable": name, "order": math.nan, "r2": math.nan})
            continue
        # error ~ s^order, i.e. growth exponent -order in 1/s
        rows.append({"observable": name, "order": -fit.slope, "r2": fit.r2})
    return pd.DataFrame(rows, columns=["observable", "order", "r2"])


@dataclass
class ReportHandler(ConfiguredHandler):
    """Aggregate existing outputs of a directory into its summary tables."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        summary: dict[str, Any] = {}
        failures: list[dict[str, float | str]] = []
        if (self.output_dir / RUNS_FILENAME).is_file():
            result = load_sweep(config, self.output_dir)
            frame, summary = summarize_sweep(result, config)
            self.write_frame(frame, SUMMARY_FILENAME)
            failures = result.failures
        comparison_path = self.output_dir / COMPARISON_FILENAME
        if comparison_path.is_file():
            orders = convergence_orders(pd.read_csv(comparison_path))
            self.write_frame(orders, CONVERGENCE_FILENAME)
            summary["orders"] = {
                str(name): float(order)
                for name, order in zip(orders["observable"], orders["order"])
            }
        if not self.artifacts:
            self.log.warning(f"Nothing to report in {self.output_dir}")
        return self.response(failures=failures, summary=summary)
