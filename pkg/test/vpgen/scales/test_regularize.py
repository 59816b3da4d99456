import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest import mark, param

from vpgen.radial_field.model import RadialGrid
from vpgen.scales.model import (
    ColdDatum,
    DatumError,
    DensityProfile,
    Shell,
    ShellDatum,
    SmoothDatum,
    VelocityLaw,
)
from vpgen.scales.regularize import (
    CONSTRUCTION_CONSTANT,
    construction_constant,
    datum_norms,
    partition_mass,
    regularize,
    speeds,
)

TWO_SHELLS = ShellDatum(shells=(Shell(1.0, 0.0, 0.4), Shell(2.0, 0.1, 0.6)))


@given(
    total=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    n=st.integers(min_value=1, max_value=5000),
)
def test__partition_mass__sums_exactly(total: float, n: int):
    weights = partition_mass(total, n)

    assert weights.shape == (n,)
    assert np.all(weights > 0)
    assert math.fsum(weights) == total
    assert weights.max() - weights.min() <= np.spacing(weights.max()) * 2


@mark.parametrize(
    "total, n",
    [
        param(0.0, 1, id="zero mass"),
        param(math.inf, 1, id="infinite mass"),
        param(1.0, 0, id="no particles"),
    ],
)
def test__partition_mass__rejects_invalid_input(total, n):
    with pytest.raises(DatumError):
        partition_mass(total, n)


@mark.parametrize(
    "datum",
    [
        param(ColdDatum(), id="cold uniform"),
        param(ColdDatum(mass=2.0, profile=DensityProfile.PARABOLIC), id="cold parabolic"),
        param(TWO_SHELLS, id="two shells"),
        param(SmoothDatum(), id="smooth"),
    ],
)
def test__regularize__preserves_mass_exactly(datum):
    ensemble = regularize(datum, 0.25, 1000, seed=7)

    assert ensemble.n == 1000
    assert math.fsum(ensemble.m) == datum.mass
    assert ensemble.total_mass == datum.mass
    assert ensemble.width == 0.25
    assert np.all(ensemble.r >= 0)
    assert np.all(ensemble.L >= 0)


def test__regularize__is_deterministic_in_the_seed():
    first = regularize(ColdDatum(), 0.5, 500, seed=3)
    again = regularize(ColdDatum(), 0.5, 500, seed=3)
    other = regularize(ColdDatum(), 0.5, 500, seed=4)

    np.testing.assert_array_equal(first.r, again.r)
    np.testing.assert_array_equal(first.vr, again.vr)
    assert not np.array_equal(first.vr, other.vr)


@mark.parametrize(
    "s", [param(1.0, id="s=1"), param(1 / 8, id="s=1/8"), param(1 / 64, id="s=1/64")]
)
def test__regularize__cold_velocity_spread_is_within_the_kernel(s):
    datum = ColdDatum()

    ensemble = regularize(datum, s, 2000, seed=1)

    assert ensemble.kernel_width == pytest.approx((s / datum.density_peak) ** (1 / 3))
    assert speeds(ensemble).max() <= ensemble.kernel_width * (1 + 1e-12)
    assert ensemble.r.max() <= datum.radius
    assert ensemble.fvalue_cap <= construction_constant(datum) / s


def test__regularize__cold_spread_shrinks_with_width():
    wide = regularize(ColdDatum(), 1.0, 2000, seed=1)
    narrow = regularize(ColdDatum(), 1 / 64, 2000, seed=1)

    assert speeds(narrow).max() < speeds(wide).max()
    assert narrow.fvalue_cap > wide.fvalue_cap


def test__regularize__hubble_flow_is_the_mean_velocity():
    datum = ColdDatum(velocity=VelocityLaw.HUBBLE, hubble_rate=-1.0)

    ensemble = regularize(datum, 1 / 64, 4000, seed=2)

    assert np.all(np.abs(ensemble.vr + ensemble.r) <= ensemble.kernel_width * (1 + 1e-12))


def test__regularize__zero_spread_keeps_the_cold_datum():
    ensemble = regularize(ColdDatum(), 0.5, 100, seed=0, zero_spread=True)

    assert np.all(ensemble.vr == 0)
    assert np.all(ensemble.L == 0)
    assert ensemble.fvalue_cap == math.inf


def test__regularize__shells_stay_away_from_the_origin():
    ensemble = regularize(TWO_SHELLS, 0.5, 1000, seed=5)

    assert ensemble.r.min() > 0
    inner = ensemble.r < 1.5
    assert math.fsum(ensemble.m[inner]) == pytest.approx(0.4)
    assert np.all(np.abs(ensemble.vr[~inner] - 0.1) < 1.0)


def test__regularize__shell_counts_follow_the_masses():
    ensemble = regularize(TWO_SHELLS, 0.5, 10, seed=5)

    assert np.count_nonzero(ensemble.r < 1.5) == 4
    assert ensemble.resolution == 4.0
    assert ensemble.under_resolved


@mark.parametrize(
    "datum, s, n",
    [
        param(ColdDatum(), 0.0, 10, id="zero width"),
        param(ColdDatum(), 1.5, 10, id="width above one"),
        param(ColdDatum(), 0.5, 0, id="no particles"),
        param(TWO_SHELLS, 0.5, 1, id="fewer particles than shells"),
        param(ShellDatum(shells=(Shell(0.01, 0.0, 1.0),)), 1.0, 10, id="shell touches origin"),
    ],
)
def test__regularize__rejects_invalid_requests(datum, s, n):
    with pytest.raises(DatumError):
        regularize(datum, s, n, seed=0)


def test__datum_norms__reports_exact_mass_and_support():
    ensemble = regularize(ColdDatum(), 0.5, 2000, seed=11)

    norms = datum_norms(ensemble, RadialGrid.uniform(1.25, 20))

    assert norms.l1 == 1.0
    assert norms.r_max <= 1.0
    assert norms.v_max <= ensemble.kernel_width * (1 + 1e-12)
    assert 0 < norms.linf_f < math.inf


def test__datum_norms__is_infinite_without_velocity_spread():
    ensemble = regularize(ColdDatum(), 0.5, 100, seed=0, zero_spread=True)

    assert datum_norms(ensemble, RadialGrid.uniform(1.25, 10)).linf_f == math.inf


@mark.parametrize(
    "datum, widths",
    [
        param(ColdDatum(), (1.0, 1 / 4, 1 / 16, 1 / 64), id="cold unit ball"),
        param(ColdDatum(mass=100.0), (1.0, 1 / 4, 1 / 16), id="dense cold ball"),
        param(
            ColdDatum(mass=2.0, profile=DensityProfile.PARABOLIC), (1.0, 1 / 8), id="parabolic"
        ),
        param(ShellDatum(shells=(Shell(1.0, 0.0, 1.0),)), (1 / 4, 1 / 16), id="single shell"),
        param(TWO_SHELLS, (1 / 4, 1 / 16, 1 / 64), id="two shells"),
        param(SmoothDatum(), (1.0, 1 / 8), id="smooth"),
    ],
)
def test__regularize__sup_norm_budget_holds_across_widths(datum, widths):
    budget = construction_constant(datum)

    for s in widths:
        ensemble = regularize(datum, s, 400, seed=0)
        assert ensemble.fvalue_cap * s <= budget


def test__construction_constant__grows_with_the_cold_density():
    dense = ColdDatum(mass=100.0)

    ensemble = regularize(dense, 0.5, 200, seed=0)

    assert construction_constant(ColdDatum()) == CONSTRUCTION_CONSTANT
    assert ensemble.fvalue_cap * 0.5 > CONSTRUCTION_CONSTANT
    assert construction_constant(dense) == pytest.approx(
        CONSTRUCTION_CONSTANT * dense.density_peak**2
    )


def test__regularize__single_shell_is_concentrated_at_its_radius():
    datum = ShellDatum(shells=(Shell(1.0, 0.0, 1.0),))

    ensemble = regularize(datum, 0.25, 2000, seed=3)

    width = ensemble.kernel_width
    assert np.all(np.abs(ensemble.r - 1.0) <= width * (1 + 1e-12))
    assert speeds(ensemble).max() <= width * (1 + 1e-12)
    assert ensemble.fvalue_cap <= CONSTRUCTION_CONSTANT / 0.25


def test__datum_norms__measured_sup_grows_like_one_over_width():
    datum = ColdDatum()
    grid = RadialGrid.uniform(1.25, 5)
    widths = [1 / 2, 1 / 8, 1 / 32]

    scaled = [
        datum_norms(regularize(datum, s, 4000, seed=9), grid).linf_f * s for s in widths
    ]

    assert scaled == pytest.approx([scaled[0]] * len(widths), rel=1e-2)
    assert max(scaled) <= construction_constant(datum)
