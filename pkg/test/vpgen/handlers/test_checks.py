import numpy as np
import pandas as pd

from test.base import BaseTest
from test.vpgen.handlers.base import invoke
from vpgen.handlers.checks import (
    POISSON_COLUMNS,
    POISSON_FILENAME,
    SCALE_CHECK_FILENAME,
    VANISHING_FILENAME,
    PoissonCheckHandler,
    ScaleCheckHandler,
    quantile_particles,
)
from vpgen.scales.model import ColdDatum


class QuantileParticlesTests(BaseTest):
    def test__quantile_particles__midpoints_of_mass(self):
        particles = quantile_particles(ColdDatum(), 4)

        # uniform ball: M(r) = r^3
        self.assertAllClose(particles.r, np.cbrt([0.125, 0.375, 0.625, 0.875]))
        self.assertEqual(particles.m.sum(), 1.0)
        self.assertEqual(list(particles.ids), [0, 1, 2, 3])


class PoissonCheckHandlerTests(BaseTest):
    def test__handle__compares_both_paths(self):
        out = self.tmp_path()

        response = invoke(
            PoissonCheckHandler,
            "poisson-check",
            out,
            poisson={"particles": 2000, "spacing": 0.1, "subsamples": 1},
        )

        poisson = pd.read_csv(out / POISSON_FILENAME)
        self.assertEqual(list(poisson.columns), POISSON_COLUMNS)
        self.assertEqual(list(poisson["r"]), [0.0, 1.0, 2.0])
        self.assertAllClose(poisson["reference"], [-1.5, -1.0, -0.5], rtol=1e-9)
        self.assertTrue(poisson["profile_pass"].all())
        self.assertLess(poisson["profile_error"].max(), 1e-6)
        self.assertTrue(response.summary["profile_passed"])
        self.assertTrue(response.summary["pointwise_bound_passed"])
        vanishing = pd.read_csv(out / VANISHING_FILENAME)
        self.assertEqual(list(vanishing["representative"]), ["plateau", "radial", "particles"])
        self.assertEqual(response.summary["vanishing"]["plateau"][1], False)

    def test__handle__non_cold_datum_falls_back_to_unit_ball(self):
        out = self.tmp_path()
        shell = {"variant": "shell", "shells": [{"radius": 1.0, "mass": 1.0}]}

        invoke(
            PoissonCheckHandler,
            "poisson-check",
            out,
            datum=shell,
            poisson={"particles": 500, "points": [2.0], "spacing": 0.2, "subsamples": 1},
        )

        poisson = pd.read_csv(out / POISSON_FILENAME)
        self.assertAllClose(poisson["reference"], [-0.5], rtol=1e-9)


class ScaleCheckHandlerTests(BaseTest):
    def test__handle__reports_membership(self):
        out = self.tmp_path()

        response = invoke(
            ScaleCheckHandler,
            "scale-check",
            out,
            scale_check={"family": "power-of-log", "p": 2.0, "variant": 1},
        )

        self.assertTrue(response.summary["member"])
        self.assertEqual(response.summary["variant"], 1)
        self.assertTrue((out / SCALE_CHECK_FILENAME).is_file())
        self.assertEqual(response.artifacts, [str(out / SCALE_CHECK_FILENAME)])

    def test__handle__power_law_is_not_a_member(self):
        response = invoke(
            ScaleCheckHandler,
            "scale-check",
            self.tmp_path(),
            scale_check={"family": "power-law", "p": 2.0, "a": 0.1},
        )

        self.assertFalse(response.summary["member"])
