import math

import numpy as np
import pytest
from pytest import mark, param

from test.vpgen.base import THREE_PARTICLES
from vpgen.radial_field.field import build_snapshot
from vpgen.radial_field.model import FieldError, PointCloud, RadialDensity, RadialGrid
from vpgen.radial_field.vanishing import (
    SELF_CELL_INTEGRAL,
    check_vanishing_conditions,
    plateau_representative,
    radial_representative,
    snapshot_representative,
    solve_vanishing_at_infinity,
)
from vpgen.scales.model import ColdDatum

BALL = ColdDatum()
BALL_SOURCE = RadialDensity(density=BALL.density, support_radius=BALL.radius)


def uniform_ball_potential(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    inside = -(3.0 - r * r) / 2.0
    with np.errstate(divide="ignore"):
        outside = -1.0 / np.where(r > 0, r, 1.0)
    return np.where(r < 1.0, inside, outside)


def test__SELF_CELL_INTEGRAL__value():
    assert SELF_CELL_INTEGRAL == pytest.approx(2.3800773, rel=1e-6)


def test__solve_vanishing_at_infinity__radial_path_is_exact_for_the_uniform_ball():
    points = np.array([0.0, 0.5, 1.0, 2.0])

    solution = solve_vanishing_at_infinity(BALL_SOURCE, points, spacing=0.1)

    np.testing.assert_allclose(solution.radial, uniform_ball_potential(points), rtol=1e-9)
    assert solution.support_radius == 1.0


def test__solve_vanishing_at_infinity__paths_agree_for_the_uniform_ball():
    points = np.array([0.0, 1.0, 2.0])

    solution = solve_vanishing_at_infinity(BALL_SOURCE, points, spacing=0.05)

    np.testing.assert_allclose(solution.convolution, solution.radial, atol=2e-2)
    assert solution.max_discrepancy < 2e-2


def test__solve_vanishing_at_infinity__flips_sign_with_gamma():
    points = np.array([2.0])

    attractive = solve_vanishing_at_infinity(BALL_SOURCE, points, spacing=0.2)
    repulsive = solve_vanishing_at_infinity(BALL_SOURCE, points, gamma=-1, spacing=0.2)

    np.testing.assert_allclose(repulsive.radial, -attractive.radial)


def test__solve_vanishing_at_infinity__sums_point_clouds_directly():
    cloud = PointCloud(
        positions=np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
        masses=np.array([1.0, 1.0]),
        support_radius=1.0,
    )

    solution = solve_vanishing_at_infinity(cloud, np.zeros((1, 3)))

    np.testing.assert_allclose(solution.convolution, [-2.0])
    assert solution.radial is None
    assert math.isnan(solution.max_discrepancy)


@mark.parametrize(
    "source, points",
    [
        param(
            RadialDensity(density=BALL.density, support_radius=None),
            np.array([1.0]),
            id="undeclared support",
        ),
        param(
            RadialDensity(density=BALL.density, support_radius=math.inf),
            np.array([1.0]),
            id="infinite support",
        ),
        param(BALL_SOURCE, np.zeros((2, 2)), id="malformed points"),
        param(
            PointCloud(positions=np.zeros((2, 3)), masses=np.ones(3), support_radius=0.0),
            np.array([1.0]),
            id="ragged point cloud",
        ),
    ],
)
def test__solve_vanishing_at_infinity__rejects_invalid_sources(source, points):
    with pytest.raises(FieldError):
        solve_vanishing_at_infinity(source, points, spacing=0.2)


def test__check_vanishing_conditions__accepts_the_radial_solution():
    representative = radial_representative(BALL_SOURCE, r_max=4.0)

    conditions = check_vanishing_conditions(representative)

    assert conditions.cond_i
    assert conditions.cond_ii
    assert conditions.decay_constant == pytest.approx(1.0, rel=1e-9)


def test__check_vanishing_conditions__rejects_the_plateau():
    conditions = check_vanishing_conditions(plateau_representative())

    assert conditions.cond_i
    assert not conditions.cond_ii
    assert conditions.max_laplacian_outside > 1e-3


def test__check_vanishing_conditions__accepts_a_particle_snapshot():
    snapshot = build_snapshot(THREE_PARTICLES, RadialGrid.uniform(6.0, 600))
    representative = snapshot_representative(snapshot)

    conditions = check_vanishing_conditions(representative, tolerance=1e-9)

    assert representative.source_radius == pytest.approx(1.51)
    assert conditions.cond_i
    assert conditions.cond_ii


@mark.parametrize(
    "inner, outer, r_max",
    [param(20.0, 10.0, 50.0, id="inverted"), param(10.0, 60.0, 50.0, id="past grid end")],
)
def test__plateau_representative__rejects_invalid_cutoffs(inner, outer, r_max):
    with pytest.raises(FieldError):
        plateau_representative(inner, outer, r_max)


def test__radial_representative__requires_grid_past_the_support():
    with pytest.raises(FieldError):
        radial_representative(BALL_SOURCE, r_max=1.0)
