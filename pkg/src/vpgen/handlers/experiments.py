"""Handlers for the simulation experiments: single runs, sweeps, stability and limits."""

__all__ = [
    "LimitHandler",
    "RunHandler",
    "StabilityHandler",
    "SweepHandler",
]

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from vpgen.asymptotics.model import STABILITY_COLUMNS, SweepResult
from vpgen.asymptotics.stability import (
    linear_response_ratios,
    stability_experiment,
    stability_sweep,
)
from vpgen.asymptotics.sweep import regularized_run, run_sweep, write_sweep
from vpgen.dynamics.integrator import choose_dt
from vpgen.handlers.base import ConfiguredHandler
from vpgen.handlers.model import ExperimentConfig, ExperimentResponse
from vpgen.handlers.report import (
    COMPARISON_FILENAME,
    CONVERGENCE_FILENAME,
    SUMMARY_FILENAME,
    convergence_orders,
    summarize_sweep,
)
from vpgen.limits.compare import collapse_time, compare_sweep, oracle_for, recorded_run
from vpgen.limits.model import ObservableSeries
from vpgen.radial_field.field import build_snapshot

SNAPSHOT_FILENAME = "snapshot_final.csv"
STABILITY_FILENAME = "stability.csv"
AMPLIFICATION_FILENAME = "amplification.csv"
ORACLE_FILENAME = "oracle.csv"
COLLAPSE_FILENAME = "collapse.csv"


def _failures(result: SweepResult) -> list[dict[str, float | str]]:
    return [dict(failure) for failure in result.failures]


@dataclass
class RunHandler(ConfiguredHandler):
    """Integrate the finest configured width and write its metrics and final field."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        s = config.widths[-1]
        spec = config.to_sweep_spec(widths=[s])
        run = regularized_run(spec, s)
        result = SweepResult(
            spec=spec,
            runs=[run],
            failures=[] if run.succeeded else [{"width": s, "error": run.error or ""}],
        )
        self.record(write_sweep(result, self.output_dir))
        summary: dict = {"width": s, "n_particles": run.n_particles, "status": str(run.status)}
        if run.metrics is not None and run.metrics.final_state is not None:
            state = run.metrics.final_state
            snapshot = build_snapshot(
                state,
                run.metrics.grid,
                gamma=state.gamma,
                t=state.t,
                support_bound=state.support_bound,
            )
            self.write_frame(snapshot.to_frame(), SNAPSHOT_FILENAME)
            mass = run.metrics.column("mass")
            energy = run.metrics.column("energy")
            summary.update(
                dt=run.dt,
                mass_drift=float(mass.max() - mass.min()),
                energy_drift=float(np.max(np.abs(energy - energy[0]))),
                max_r2_force=float(run.metrics.column("max_r2_force").max()),
                grid_extended=run.metrics.grid_extended,
            )
        return self.response(failures=_failures(result), summary=summary)


@dataclass
class SweepHandler(ConfiguredHandler):
    """Run every width, write the per-width metrics and the estimate summary."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        result = run_sweep(config.to_sweep_spec(), threads=threads)
        self.record(write_sweep(result, self.output_dir))
        frame, summary = summarize_sweep(result, config)
        self.write_frame(frame, SUMMARY_FILENAME)
        summary["runs"] = len(result.successful)
        return self.response(failures=_failures(result), summary=summary)


@dataclass
class StabilityHandler(ConfiguredHandler):
    """Perturbation experiments across widths and the fitted amplification law."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        spec = config.to_sweep_spec()
        options = config.stability
        widths = options.widths or config.widths
        reports, fit = stability_sweep(spec, options.delta, options.mode, widths)

        self.write_frame(
            pd.DataFrame([report.to_dict() for report in reports], columns=STABILITY_COLUMNS),
            STABILITY_FILENAME,
        )
        for report in reports:
            if report.history is not None:
                self.write_frame(report.history, f"stability_history_s{report.width:.6g}.csv")
        self.write_frame(
            pd.DataFrame(
                {
                    "s": list(fit.widths),
                    "amplification": list(fit.amplifications),
                    "bound": fit.bound(np.asarray(fit.widths)),
                }
            ),
            AMPLIFICATION_FILENAME,
        )
        summary: dict = {"A": fit.A, "B": fit.B, "law_passed": fit.passed}
        if options.linear_check and options.delta > 0:
            finest = min(reports, key=lambda report: report.width)
            half = stability_experiment(spec, finest.width, options.delta / 2, options.mode)
            summary["linear_response"] = {
                "s": finest.width,
                **linear_response_ratios(finest, half),
            }
        skipped = sorted(set(widths) - {report.width for report in reports}, reverse=True)
        failures: list[dict[str, float | str]] = [
            {"width": s, "error": "perturbation not smaller than the kernel width"}
            for s in skipped
        ]
        return self.response(failures=failures, summary=summary)


@dataclass
class LimitHandler(ConfiguredHandler):
    """Regularized runs against the limit oracle of a cold or shell datum."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        spec = config.to_sweep_spec()
        options = config.limit

        runs, series_by_width = [], {}
        for s in spec.widths:
            run, series = recorded_run(spec, s, options.profile_bins)
            runs.append(run)
            if run.succeeded:
                series_by_width[s] = series
        runs.sort(key=lambda run: run.width)
        result = SweepResult(
            spec=spec,
            runs=runs,
            failures=[
                {"width": run.width, "error": run.error or ""}
                for run in runs
                if not run.succeeded
            ],
        )
        self.record(write_sweep(result, self.output_dir))

        oracle = oracle_for(
            spec.datum,
            spec.T,
            choose_dt(spec.widths[-1], spec.eta),
            gamma=options.oracle_gamma,
            ratio=options.dt_oracle_ratio,
            labels=options.labels,
        )
        self.write_frame(oracle.to_frame(), ORACLE_FILENAME)
        oracle_series = ObservableSeries.from_trajectory(oracle, options.profile_bins)

        horizon = oracle.horizon
        if horizon < spec.T * (1.0 - 1e-9):
            # stay clear of the crossing or collapse that ended the oracle
            horizon *= options.horizon_fraction
        comparison = compare_sweep(series_by_width, oracle_series, options.observables, horizon)
        self.write_frame(comparison, COMPARISON_FILENAME)
        orders = convergence_orders(comparison)
        self.write_frame(orders, CONVERGENCE_FILENAME)

        collapse = pd.DataFrame(
            [
                {"s": s, "collapse_time": collapse_time(series), "oracle": oracle.center_time}
                for s, series in sorted(series_by_width.items(), reverse=True)
            ],
            columns=["s", "collapse_time", "oracle"],
        )
        self.write_frame(collapse, COLLAPSE_FILENAME)

        summary = {
            "horizon": horizon,
            "oracle_center_time": oracle.center_time,
            "oracle_first_crossing": oracle.first_crossing,
            "orders": {
                str(name): float(order)
                for name, order in zip(orders["observable"], orders["order"])
            },
        }
        if series_by_width:
            finest = min(series_by_width)
            summary["collapse_time"] = collapse_time(series_by_width[finest])
            if math.isfinite(oracle.center_time):
                summary["collapse_error"] = abs(summary["collapse_time"] - oracle.center_time)
        return self.response(failures=_failures(result), summary=summary)
