import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from vpgen.asymptotics.model import SweepResult, SweepRun, SweepSpec
from vpgen.dynamics.model import AUXILIARY_COLUMNS, METRICS_COLUMNS, RunMetrics
from vpgen.scales.model import ColdDatum, ParticleEnsemble
from vpgen.scales.regularize import partition_mass


@dataclass
class Particles:
    """Bare particle columns for field computations."""

    r: np.ndarray
    m: np.ndarray
    ids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.m = np.asarray(self.m, dtype=np.float64)
        self.ids = np.arange(self.r.size)


THREE_PARTICLES = Particles(r=[0.5, 1.0, 1.5], m=[1.0, 2.0, 3.0])


def make_ensemble(r, vr, L=None, m=None, gamma: int = 0) -> ParticleEnsemble:
    """Ensemble from explicit columns, unit total mass by default."""
    r = np.asarray(r, dtype=np.float64)
    n = r.size
    m = partition_mass(1.0, n) if m is None else np.asarray(m, dtype=np.float64)
    return ParticleEnsemble(
        r=r,
        vr=np.asarray(vr, dtype=np.float64),
        L=np.zeros(n) if L is None else np.asarray(L, dtype=np.float64),
        m=m,
        width=1.0,
        fvalue_cap=math.inf,
        total_mass=math.fsum(m),
        kernel_width=1.0,
        resolution=float(n),
        gamma=gamma,
    )


def synthetic_run(
    s: float, exponents: dict[str, float], times=(0.0, 0.3, 0.6, 0.8), tangent_C: float = 0.0
) -> SweepRun:
    """A successful run whose diagnostics follow s^-exponent, constant in time."""
    n = len(times)
    columns = {name: np.full(n, np.nan) for name in METRICS_COLUMNS + AUXILIARY_COLUMNS}
    columns["t"] = np.asarray(times, dtype=np.float64)
    columns["mass"] = np.ones(n)
    columns["invalid_fraction"] = np.zeros(n)
    laws = {
        "P": "P",
        "Q": "P",
        "rho_sup": "rho",
        "force_sup": "uprime",
        "u_sup": "u",
        "key_ratio": "key_ratio",
    }
    for column, quantity in laws.items():
        columns[column] = np.full(n, s ** -exponents.get(quantity, 0.0))
    columns["tangent_sup"] = np.full(n, math.exp(1.0 + tangent_C * s**-2.0))
    frame = pd.DataFrame(columns, columns=METRICS_COLUMNS + AUXILIARY_COLUMNS)
    return SweepRun(
        width=s,
        n_particles=100,
        dt=1e-3,
        fvalue_cap=s ** -exponents.get("f", 1.0),
        fvalue_measured=s ** -exponents.get("f_measured", 1.0),
        metrics=RunMetrics(frame=frame, dt=1e-3, width=s),
    )


def synthetic_sweep(
    exponents: dict[str, float],
    widths=(1.0, 0.5, 0.25, 0.125, 0.0625),
    tangent_C: float = 0.0,
) -> SweepResult:
    spec = SweepSpec(datum=ColdDatum(), widths=tuple(widths), T=0.8)
    runs = [synthetic_run(s, exponents, tangent_C=tangent_C) for s in sorted(widths)]
    return SweepResult(spec=spec, runs=runs)
