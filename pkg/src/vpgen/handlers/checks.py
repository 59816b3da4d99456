"""Handlers for the field solver checks and scale classification."""

__all__ = [
    "PoissonCheckHandler",
    "ScaleCheckHandler",
    "quantile_particles",
]

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from vpgen.handlers.base import ConfiguredHandler
from vpgen.handlers.model import ColdDatumConfig, ExperimentConfig, ExperimentResponse
from vpgen.radial_field.field import build_snapshot, potential_profile
from vpgen.radial_field.model import RadialDensity, RadialGrid
from vpgen.radial_field.vanishing import (
    check_vanishing_conditions,
    plateau_representative,
    radial_representative,
    snapshot_representative,
    solve_vanishing_at_infinity,
)
from vpgen.scales.classify import classify_scale
from vpgen.scales.model import ColdDatum
from vpgen.scales.regularize import partition_mass

POISSON_FILENAME = "poisson.csv"
VANISHING_FILENAME = "vanishing.csv"
SCALE_CHECK_FILENAME = "scale_check.csv"
POISSON_COLUMNS = [
    "r",
    "reference",
    "profile",
    "convolution",
    "profile_error",
    "convolution_error",
    "profile_pass",
    "convolution_pass",
]
# grid bins per datum radius for the particle profile
PROFILE_BINS_PER_RADIUS = 200


@dataclass
class QuantileParticles:
    r: np.ndarray
    m: np.ndarray
    ids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.ids = np.arange(self.r.size)


def quantile_particles(datum: ColdDatum, n: int) -> QuantileParticles:
    """Particles at the mass midpoints (k + 1/2)/n of a cold datum, weights summing exactly."""
    fractions = (np.arange(n) + 0.5) / n
    return QuantileParticles(
        r=datum.radius_of_mass_fraction(fractions), m=partition_mass(datum.mass, n)
    )


@dataclass
class PoissonCheckHandler(ConfiguredHandler):
    """Particle profile and lattice convolution against radial quadrature, plus decay checks."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        options = config.poisson
        datum_config = config.datum
        if not isinstance(datum_config, ColdDatumConfig):
            self.log.warning("Poisson check needs a cold datum; using the uniform unit ball")
            datum_config = ColdDatumConfig()
        datum = datum_config.to_datum(config.gamma)
        gamma = config.gamma
        source = RadialDensity(density=datum.density, support_radius=datum.radius)

        points = np.asarray(sorted(set(options.points)), dtype=np.float64)
        r_max = 1.25 * max(2.0 * datum.radius, float(points.max()))
        nodes = np.union1d(
            np.linspace(0.0, r_max, int(math.ceil(PROFILE_BINS_PER_RADIUS * r_max)) + 1), points
        )
        grid = RadialGrid(nodes=nodes)
        particles = quantile_particles(datum, options.particles)
        profile = potential_profile(particles, grid, gamma)[np.searchsorted(grid.nodes, points)]

        solution = solve_vanishing_at_infinity(
            source, points, gamma=gamma, spacing=options.spacing, subsamples=options.subsamples
        )
        reference = solution.radial
        profile_error = np.abs(profile - reference)
        convolution_error = np.abs(solution.convolution - reference)
        profile_pass = [bool(e <= options.profile_tolerance) for e in profile_error]
        convolution_pass = [bool(e <= options.convolution_tolerance) for e in convolution_error]
        self.write_frame(
            pd.DataFrame(
                {
                    "r": points,
                    "reference": reference,
                    "profile": profile,
                    "convolution": solution.convolution,
                    "profile_error": profile_error,
                    "convolution_error": convolution_error,
                    "profile_pass": profile_pass,
                    "convolution_pass": convolution_pass,
                },
                columns=POISSON_COLUMNS,
            ),
            POISSON_FILENAME,
        )

        snapshot = build_snapshot(particles, grid, gamma)
        representatives = {
            "plateau": plateau_representative(options.plateau_inner, options.plateau_outer),
            "radial": radial_representative(source, r_max=4.0 * datum.radius, gamma=gamma),
            "particles": snapshot_representative(snapshot),
        }
        rows = []
        for name, representative in representatives.items():
            conditions = check_vanishing_conditions(representative, options.vanishing_tolerance)
            rows.append(
                {
                    "representative": name,
                    "cond_i": conditions.cond_i,
                    "cond_ii": conditions.cond_ii,
                    "decay_constant": conditions.decay_constant,
                    "max_laplacian_outside": conditions.max_laplacian_outside,
                }
            )
        vanishing = pd.DataFrame(rows)
        self.write_frame(vanishing, VANISHING_FILENAME)

        summary = {
            "profile_passed": all(profile_pass),
            "convolution_passed": all(convolution_pass),
            "max_discrepancy": solution.max_discrepancy,
            "max_r2_force": snapshot.max_r2_force,
            "pointwise_bound_passed": snapshot.max_r2_force <= datum.mass + 1e-9,
            "vanishing": {
                row["representative"]: [row["cond_i"], row["cond_ii"]] for row in rows
            },
        }
        return self.response(summary=summary)


@dataclass
class ScaleCheckHandler(ConfiguredHandler):
    """Class membership of a closed-form scale, with its sampled certificate."""

    def run(self, config: ExperimentConfig, threads: int) -> ExperimentResponse:
        options = config.scale_check
        scale = options.to_scale()
        report = classify_scale(scale, options.p, options.variant)
        self.write_frame(report.to_frame(), SCALE_CHECK_FILENAME)
        return self.response(
            summary={
                "scale": scale.name,
                "p": options.p,
                "variant": options.variant,
                "member": report.member,
                "max_value": report.max_value,
            }
        )
