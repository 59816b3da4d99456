import math

import numpy as np
import pandas as pd

from test.base import BaseTest
from test.vpgen.handlers.base import invoke, small_config
from vpgen.asymptotics.model import RunStatus
from vpgen.handlers.experiments import SweepHandler
from vpgen.handlers.report import (
    COMPARISON_FILENAME,
    CONVERGENCE_FILENAME,
    SUMMARY_FILENAME,
    ReportHandler,
    convergence_orders,
    load_sweep,
)


def power_comparison(orders: dict[str, float], widths=(1.0, 0.5, 0.25, 0.125)) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"s": s, "observable": name, "error": 0.3 * s**order}
            for name, order in orders.items()
            for s in widths
        ]
    )


class ConvergenceOrdersTests(BaseTest):
    def test__convergence_orders__recovers_power_laws(self):
        orders = convergence_orders(power_comparison({"r50": 1.0, "r90": 2.0}))

        self.assertEqual(list(orders["observable"]), ["r50", "r90"])
        self.assertAllClose(orders["order"], [1.0, 2.0], rtol=1e-9)
        self.assertAllClose(orders["r2"], [1.0, 1.0], rtol=1e-9)

    def test__convergence_orders__too_few_usable_errors_give_nan(self):
        comparison = power_comparison({"r10": 1.0})
        comparison.loc[comparison["s"] == 0.125, "error"] = np.nan

        orders = convergence_orders(comparison)

        self.assertTrue(math.isnan(orders["order"].iloc[0]))


class LoadSweepTests(BaseTest):
    def test__load_sweep__missing_runs_raises(self):
        with self.assertRaises(FileNotFoundError):
            load_sweep(small_config("sweep"), self.tmp_path())

    def test__load_sweep__rebuilds_written_runs(self):
        out = self.tmp_path()
        invoke(SweepHandler, "sweep", out)

        result = load_sweep(small_config("sweep"), out)

        self.assertEqual([run.width for run in result.runs], [0.5, 1.0])
        self.assertTrue(all(run.status == RunStatus.OK for run in result.runs))
        self.assertEqual(result.spec.widths, (1.0, 0.5))
        self.assertEqual(result.failures, [])
        self.assertIsNotNone(result.runs[0].metrics)


class ReportHandlerTests(BaseTest):
    def test__handle__rebuilds_sweep_summary(self):
        out = self.tmp_path()
        invoke(SweepHandler, "sweep", out)
        (out / SUMMARY_FILENAME).unlink()

        response = invoke(ReportHandler, "sweep", out)

        self.assertTrue((out / SUMMARY_FILENAME).is_file())
        self.assertIn("zero_order_passed", response.summary)
        self.assertEqual(response.artifacts, [str(out / SUMMARY_FILENAME)])

    def test__handle__refits_comparison_orders(self):
        out = self.tmp_path()
        power_comparison({"r50": 1.5}).to_csv(out / COMPARISON_FILENAME, index=False)

        response = invoke(ReportHandler, "limit", out)

        self.assertAlmostEqual(response.summary["orders"]["r50"], 1.5)
        self.assertTrue((out / CONVERGENCE_FILENAME).is_file())

    def test__handle__empty_directory_reports_nothing(self):
        response = invoke(ReportHandler, "sweep", self.tmp_path())

        self.assertEqual(response.summary, {})
        self.assertEqual(response.artifacts, [])
