import math

import pandas as pd
import pytest

from test.base import BaseTest
from test.vpgen.handlers.base import invoke
from vpgen.asymptotics.model import STABILITY_COLUMNS, metrics_filename
from vpgen.handlers.experiments import (
    AMPLIFICATION_FILENAME,
    COLLAPSE_FILENAME,
    ORACLE_FILENAME,
    SNAPSHOT_FILENAME,
    STABILITY_FILENAME,
    LimitHandler,
    RunHandler,
    StabilityHandler,
    SweepHandler,
)
from vpgen.handlers.report import (
    COMPARISON_FILENAME,
    CONVERGENCE_FILENAME,
    RUNS_FILENAME,
    SUMMARY_FILENAME,
)


class RunHandlerTests(BaseTest):
    def test__handle__runs_finest_width(self):
        out = self.tmp_path()

        response = invoke(RunHandler, "run", out)

        summary = response.summary
        self.assertEqual(summary["width"], 0.5)
        self.assertEqual(summary["status"], "ok")
        self.assertEqual(summary["n_particles"], 200)
        self.assertLess(summary["mass_drift"], 1e-12)
        self.assertLessEqual(summary["max_r2_force"], 1.0 + 1e-9)
        self.assertEqual(response.failures, [])
        for name in (metrics_filename(0.5), RUNS_FILENAME, SNAPSHOT_FILENAME):
            self.assertTrue((out / name).is_file(), name)
        self.assertIn(str(out / SNAPSHOT_FILENAME), response.artifacts)
        self.assertFalse((out / metrics_filename(1.0)).exists())


class SweepHandlerTests(BaseTest):
    def test__handle__writes_every_width(self):
        out = self.tmp_path()

        response = invoke(SweepHandler, "sweep", out)

        self.assertEqual(response.summary["runs"], 2)
        self.assertEqual(response.summary["t_star"], pytest.approx(0.015))
        runs = pd.read_csv(out / RUNS_FILENAME)
        self.assertEqual(sorted(runs["s"]), [0.5, 1.0])
        self.assertTrue((out / SUMMARY_FILENAME).is_file())
        self.assertEqual(len(response.artifacts), 4)

    def test__handle__failed_width_is_reported_not_raised(self):
        out = self.tmp_path()
        shell = {"variant": "shell", "shells": [{"radius": 1.0, "mass": 1.0}]}

        # a unit-width kernel reaches past the origin from radius 1
        response = invoke(SweepHandler, "sweep", out, datum=shell, n0=50)

        self.assertEqual([failure["width"] for failure in response.failures], [1.0])
        self.assertEqual(response.summary["runs"], 1)


class StabilityHandlerTests(BaseTest):
    def test__handle__fits_amplification_law(self):
        out = self.tmp_path()

        response = invoke(StabilityHandler, "stability", out)

        summary = response.summary
        self.assertGreaterEqual(summary["B"], 0.0)
        self.assertTrue(math.isfinite(summary["A"]))
        self.assertEqual(summary["linear_response"]["s"], 0.5)
        stability = pd.read_csv(out / STABILITY_FILENAME)
        self.assertEqual(list(stability.columns), STABILITY_COLUMNS)
        self.assertEqual(len(stability), 2)
        self.assertTrue((out / AMPLIFICATION_FILENAME).is_file())
        self.assertTrue((out / "stability_history_s0.5.csv").is_file())

    def test__handle__skips_widths_too_narrow_for_delta(self):
        out = self.tmp_path()

        # cold unit ball kernel widths are about 1.61 at s=1 and 1.28 at s=0.5
        response = invoke(
            StabilityHandler,
            "stability",
            out,
            stability={"delta": 1.4, "mode": "forcing", "linear_check": False},
        )

        self.assertEqual([failure["width"] for failure in response.failures], [0.5])
        self.assertNotIn("linear_response", response.summary)
        self.assertEqual(len(pd.read_csv(out / STABILITY_FILENAME)), 1)


class LimitHandlerTests(BaseTest):
    def test__handle__compares_runs_with_oracle(self):
        out = self.tmp_path()

        response = invoke(
            LimitHandler, "limit", out, limit={"labels": 32, "dt_oracle_ratio": 5}
        )

        summary = response.summary
        self.assertEqual(summary["horizon"], pytest.approx(0.02))
        self.assertEqual(summary["oracle_center_time"], math.inf)
        self.assertEqual(summary["oracle_first_crossing"], math.inf)
        self.assertIn("collapse_time", summary)
        self.assertNotIn("collapse_error", summary)
        names = (ORACLE_FILENAME, COMPARISON_FILENAME, CONVERGENCE_FILENAME, COLLAPSE_FILENAME)
        for name in names:
            self.assertTrue((out / name).is_file(), name)
        comparison = pd.read_csv(out / COMPARISON_FILENAME)
        self.assertEqual(set(comparison["s"]), {1.0, 0.5})
        self.assertEqual(
            set(comparison["observable"]), {"r10", "r50", "r90", "vr_profile"}
        )
        # two widths are too few for an order fit
        self.assertTrue(all(math.isnan(order) for order in summary["orders"].values()))
