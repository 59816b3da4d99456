"""Perturbation experiments measuring the amplification of small differences.

A base run and a perturbed run are integrated side by side. Perturbations are
either of the initial data or a constant per-particle forcing, of size delta.
Differences of the characteristics are matched by particle id; density and
force differences are taken from the piecewise-linear mass profiles so they are
continuous in the particle positions.
"""

__all__ = [
    "linear_response_ratios",
    "perturbation_field",
    "stability_experiment",
    "stability_sweep",
]

import logging
import math
from collections.abc import Sequence
from dataclasses import replace

import numpy as np
import pandas as pd

from vpgen.asymptotics.fitting import fit_gronwall_law
from vpgen.asymptotics.model import (
    GronwallFit,
    PerturbationMode,
    StabilityError,
    StabilityReport,
    SweepSpec,
)
from vpgen.dynamics.integrator import choose_dt, initial_state, integrate
from vpgen.dynamics.model import SimState
from vpgen.radial_field.model import EnclosedMass, FieldSnapshot, RadialGrid
from vpgen.scales.model import ParticleEnsemble
from vpgen.scales.regularize import regularize

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["t", "dZ", "drho", "dforce"]


def perturbation_field(ids: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-particle directions in [-1, 1] for radius and velocity."""
    count = int(ids.max(initial=-1)) + 1
    generator = np.random.Generator(np.random.Philox(key=seed + 1))
    table = 2.0 * generator.random((count, 2)) - 1.0
    return table[ids, 0], table[ids, 1]


class _Recorder:
    """Keeps, per sample, the id-ordered (r, vr) and the smoothed mass profile on fixed nodes."""

    def __init__(self, nodes: np.ndarray):
        self.nodes = nodes
        self.samples: list[tuple[float, np.ndarray, np.ndarray, np.ndarray]] = []

    def __call__(self, state: SimState, snapshot: FieldSnapshot):
        order = state.by_id()
        mass = EnclosedMass.from_particles(state).smooth(self.nodes)
        self.samples.append((state.t, state.r[order], state.vr[order], mass))


def _profile_differences(
    nodes: np.ndarray, mass: np.ndarray, other: np.ndarray, gamma: int
) -> tuple[float, float]:
    difference = mass - other
    volumes = 4.0 * math.pi / 3.0 * np.diff(nodes**3)
    drho = float(np.max(np.abs(np.diff(difference)) / volumes, initial=0.0))
    dforce = float(np.max(abs(gamma) * np.abs(difference[1:]) / nodes[1:] ** 2, initial=0.0))
    return drho, dforce


def _integrate_recorded(
    spec: SweepSpec,
    particles: ParticleEnsemble,
    forcing: np.ndarray | None,
    T: float,
    dt: float,
    grid: RadialGrid,
) -> _Recorder:
    recorder = _Recorder(grid.nodes)
    state = initial_state(particles, central_mass=spec.central_mass, forcing=forcing)
    integrate(state, T, dt, spec.sample_every, grid, stencil=spec.stencil, observer=recorder)
    return recorder


def stability_experiment(
    spec: SweepSpec,
    s: float,
    delta: float,
    mode: PerturbationMode | str = PerturbationMode.DATA,
    T: float | None = None,
) -> StabilityReport:
    """Integrate a base and a perturbed run at width s and measure their differences.

    Args:
        spec (SweepSpec): Datum and run parameters.
        s (float): Mollification width.
        delta (float): Perturbation size, smaller than the kernel width.
        mode (PerturbationMode | str): ``data`` perturbs initial radii and
            velocities by delta; ``forcing`` adds a constant radial acceleration
            of size delta, a kick of delta dt per step.
        T (float | None): Horizon; defaults to the sweep horizon.

    Raises:
        StabilityError: If delta is negative or not smaller than the kernel width.

    Returns:
        The report with sup-over-time differences and the amplification.
    """
    mode = PerturbationMode(mode)
    T = spec.T if T is None else T
    if delta < 0:
        raise StabilityError(f"Perturbation size must be nonnegative, got {delta}")
    ensemble = regularize(spec.datum, s, spec.n_particles(s), spec.seed, spec.zero_spread)
    if delta > 0 and not delta < ensemble.kernel_width:
        raise StabilityError(
            f"Perturbation {delta:g} is not smaller than the kernel width "
            f"{ensemble.kernel_width:g} at s={s:g}"
        )
    dt = choose_dt(s, spec.eta)
    grid = spec.grid_for(ensemble)
    dr, dv = perturbation_field(ensemble.ids, spec.seed)

    base = _integrate_recorded(spec, ensemble, None, T, dt, grid)
    if mode == PerturbationMode.DATA:
        moved = replace(ensemble, r=np.abs(ensemble.r + delta * dr), vr=ensemble.vr + delta * dv)
        perturbed = _integrate_recorded(spec, moved, None, T, dt, grid)
    else:
        perturbed = _integrate_recorded(spec, ensemble, delta * dv, T, dt, grid)

    rows = []
    for (t, r, vr, mass), (_, r_other, vr_other, mass_other) in zip(
        base.samples, perturbed.samples
    ):
        drho, dforce = _profile_differences(grid.nodes, mass, mass_other, spec.gamma)
        rows.append(
            {
                "t": t,
                "dZ": float(np.max(np.hypot(r - r_other, vr - vr_other), initial=0.0)),
                "drho": drho,
                "dforce": dforce,
            }
        )
    history = pd.DataFrame(rows, columns=HISTORY_COLUMNS)
    dZ, drho, dforce = (float(history[name].max()) for name in ("dZ", "drho", "dforce"))
    amplification = max(dZ, drho, dforce) / delta if delta > 0 else 0.0
    logger.info(
        f"Stability at s={s:g}, delta={delta:g} ({mode}): dZ={dZ:.3g}, drho={drho:.3g}, "
        f"dforce={dforce:.3g}, amplification={amplification:.3g}"
    )
    return StabilityReport(
        width=s,
        delta=delta,
        mode=mode,
        T=T,
        dZ=dZ,
        drho=drho,
        dforce=dforce,
        amplification=amplification,
        history=history,
    )


def linear_response_ratios(full: StabilityReport, half: StabilityReport) -> dict[str, float]:
    """Ratios of the differences at delta and delta/2; 2 in the linear regime."""
    ratios = {}
    for name in ("dZ", "drho", "dforce"):
        numerator, denominator = getattr(full, name), getattr(half, name)
        ratios[name] = numerator / denominator if denominator > 0 else math.nan
    return ratios


def stability_sweep(
    spec: SweepSpec,
    delta: float,
    mode: PerturbationMode | str = PerturbationMode.DATA,
    widths: Sequence[float] | None = None,
) -> tuple[list[StabilityReport], GronwallFit]:
    """Run `stability_experiment` at every width and fit the amplification law.

    Widths at which delta is not small enough are skipped with a warning.
    """
    reports = []
    for s in spec.widths if widths is None else widths:
        try:
            reports.append(stability_experiment(spec, s, delta, mode))
        except StabilityError as e:
            logger.warning(f"Skipping s={s:g}: {e}")
    if not reports:
        raise StabilityError(f"No width admits a perturbation of size {delta:g}")
    fit = fit_gronwall_law(
        [report.width for report in reports], [report.amplification for report in reports]
    )
    logger.info(f"Amplification law: A={fit.A:.4g}, B={fit.B:.4g}")
    return reports, fit
