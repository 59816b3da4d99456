import math

import numpy as np
import pytest

from vpgen.asymptotics.model import PerturbationMode, StabilityError, StabilityReport, SweepSpec
from vpgen.asymptotics.stability import (
    linear_response_ratios,
    perturbation_field,
    stability_experiment,
    stability_sweep,
)
from vpgen.scales.model import ColdDatum

SPEC = SweepSpec(
    datum=ColdDatum(), widths=(1.0, 0.5), n0=100, T=0.02, sample_every=5, grid_bins=50
)


def report(dZ: float, drho: float, dforce: float) -> StabilityReport:
    return StabilityReport(
        width=1.0,
        delta=1e-6,
        mode=PerturbationMode.DATA,
        T=1.0,
        dZ=dZ,
        drho=drho,
        dforce=dforce,
        amplification=1.0,
    )


def test__perturbation_field__depends_only_on_the_ids():
    ids = np.array([3, 0, 2, 1])

    dr, dv = perturbation_field(ids, seed=5)
    dr_sorted, dv_sorted = perturbation_field(np.arange(4), seed=5)

    np.testing.assert_array_equal(dr, dr_sorted[ids])
    np.testing.assert_array_equal(dv, dv_sorted[ids])
    assert np.all(np.abs(dr) <= 1) and np.all(np.abs(dv) <= 1)


def test__stability_experiment__zero_perturbation_has_no_differences():
    result = stability_experiment(SPEC, 1.0, 0.0)

    assert result.dZ == 0.0
    assert result.drho == 0.0
    assert result.dforce == 0.0
    assert result.amplification == 0.0
    assert list(result.history.columns) == ["t", "dZ", "drho", "dforce"]


@pytest.mark.parametrize("mode", [PerturbationMode.DATA, PerturbationMode.FORCING])
def test__stability_experiment__measures_small_differences(mode):
    result = stability_experiment(SPEC, 1.0, 1e-6, mode)

    assert 0 < result.dZ < 1e-4
    assert math.isfinite(result.amplification)
    assert result.amplification > 0
    assert result.mode == mode
    assert result.to_dict()["s"] == 1.0


def test__stability_experiment__data_differences_respond_linearly():
    full = stability_experiment(SPEC, 1.0, 1e-6)
    half = stability_experiment(SPEC, 1.0, 5e-7)

    ratios = linear_response_ratios(full, half)

    assert ratios["dZ"] == pytest.approx(2.0, rel=0.1)


def test__stability_experiment__rejects_perturbations_as_large_as_the_kernel():
    with pytest.raises(StabilityError):
        stability_experiment(SPEC, 1.0, 10.0)
    with pytest.raises(StabilityError):
        stability_experiment(SPEC, 1.0, -1e-6)


def test__linear_response_ratios__is_nan_for_vanishing_denominators():
    ratios = linear_response_ratios(report(2.0, 1.0, 0.0), report(1.0, 0.0, 0.0))

    assert ratios["dZ"] == 2.0
    assert math.isnan(ratios["drho"])
    assert math.isnan(ratios["dforce"])


def test__stability_sweep__fits_the_amplification_law():
    reports, fit = stability_sweep(SPEC, 1e-6)

    assert [r.width for r in reports] == [1.0, 0.5]
    assert fit.passed
    assert np.all(fit.bound(np.array(fit.widths)) >= np.array(fit.amplifications) * (1 - 1e-9))


def test__stability_sweep__fails_when_no_width_admits_the_perturbation():
    with pytest.raises(StabilityError):
        stability_sweep(SPEC, 10.0)
