"""Deterministic width sweeps of regularized runs."""

__all__ = [
    "regularized_run",
    "run_sweep",
    "write_sweep",
]

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from vpgen.asymptotics.model import (
    RunStatus,
    SweepResult,
    SweepRun,
    SweepSpec,
    metrics_filename,
)
from vpgen.dynamics.integrator import choose_dt, initial_state, integrate
from vpgen.dynamics.model import Observer
from vpgen.scales.regularize import datum_norms, regularize

logger = logging.getLogger(__name__)


def regularized_run(
    spec: SweepSpec, s: float, seed: int | None = None, observer: Observer | None = None
) -> SweepRun:
    """Regularize the datum at width s, integrate to T and record the outcome.

    Any `ValueError` raised while building or integrating the run is recorded
    on the returned run instead of propagating.
    """
    seed = spec.seed if seed is None else seed
    n = spec.n_particles(s)
    run = SweepRun(width=s, n_particles=n)
    try:
        ensemble = regularize(spec.datum, s, n, seed, zero_spread=spec.zero_spread)
        run.fvalue_cap = ensemble.fvalue_cap
        run.kernel_width = ensemble.kernel_width
        run.dt = choose_dt(s, spec.eta)
        grid = spec.grid_for(ensemble)
        run.fvalue_measured = datum_norms(ensemble, grid).linf_f
        state = initial_state(
            ensemble, central_mass=spec.central_mass, track_tangent=spec.track_tangent
        )
        run.metrics = integrate(
            state,
            spec.T,
            run.dt,
            spec.sample_every,
            grid,
            stencil=spec.stencil,
            observer=observer,
            width=s,
            fvalue_cap=ensemble.fvalue_cap,
        )
        if ensemble.under_resolved:
            run.status = RunStatus.UNDER_RESOLVED
    except ValueError as e:
        logger.warning(f"Run at s={s:g} failed: {e}")
        run.status = RunStatus.FAILED
        run.error = str(e)
    return run


def _run_width(args: tuple[SweepSpec, float]) -> SweepRun:
    spec, s = args
    return regularized_run(spec, s)


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Run every width of the sweep, in parallel processes when threads > 1.

    Runs are independent and deterministic; the result lists them in
    ascending width regardless of completion order. Failed widths are
    recorded as ``{"width", "error"}`` and the sweep continues.

    Args:
        spec (SweepSpec): The sweep.
        threads (int): Worker processes.

    Returns:
        The sweep result.
    """
    logger.info(f"Sweeping {len(spec.widths)} widths with {threads} worker(s)")
    tasks = [(spec, s) for s in spec.widths]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            runs = list(executor.map(_run_width, tasks))
    else:
        runs = [_run_width(task) for task in tasks]
    runs.sort(key=lambda run: run.width)
    failures = [
        {"width": run.width, "error": run.error or ""}
        for run in runs
        if run.status == RunStatus.FAILED
    ]
    logger.info(f"Sweep finished: {len(runs) - len(failures)} ok, {len(failures)} failed")
    return SweepResult(spec=spec, runs=runs, failures=failures)


def write_sweep(result: SweepResult, output_dir: Path) -> list[Path]:
    """Write metrics_s<width>.csv for every successful run and runs.csv.

    Returns:
        Paths of the written files.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for run in result.successful:
        path = output_dir / metrics_filename(run.width)
        run.metrics.to_frame().to_csv(path, index=False)
        written.append(path)
    runs_path = output_dir / "runs.csv"
    result.runs_frame().to_csv(runs_path, index=False)
    written.append(runs_path)
    return written
