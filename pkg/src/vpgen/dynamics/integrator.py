"""Kick-drift-kick leapfrog for the radial characteristic system.

Each particle obeys r'' = -gamma M(r)/r^2 - M_c/r^2 + L^2/r^3 with the half-self
enclosed mass. Radial (L = 0) particles that pass through the center are
reflected, which is the exact reduced image of a straight line through the
origin. The first-order variational system rides along with the same staging.
"""

__all__ = [
    "DEFAULT_ETA",
    "DEFAULT_STENCIL",
    "accelerate",
    "choose_dt",
    "initial_state",
    "integrate",
    "step",
    "tangent_operator_norm",
    "tangent_step",
    "total_energy",
]

import logging
import math
from dataclasses import replace

import numpy as np
import pandas as pd

from vpgen.dynamics.model import (
    AUXILIARY_COLUMNS,
    METRICS_COLUMNS,
    IntegrationError,
    Observer,
    RunMetrics,
    SimState,
)
from vpgen.radial_field.field import build_snapshot, min_bound_constant, verify_key_estimate
from vpgen.radial_field.model import EnclosedMass, FieldError, FieldSnapshot, RadialGrid
from vpgen.scales.model import ParticleEnsemble

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.1
DEFAULT_STENCIL = 0.02
INVALID_TANGENT_WARNING = 0.1


def choose_dt(s: float, eta: float = DEFAULT_ETA) -> float:
    """Fixed step eta * min(s^(2/3), 0.01)."""
    if not (s > 0 and eta > 0):
        raise IntegrationError(f"Need positive width and eta, got s={s}, eta={eta}")
    return eta * min(s ** (2.0 / 3.0), 0.01)


def _sort_order(state: SimState) -> np.ndarray:
    return np.lexsort((state.ids, state.r))


def _sorted(state: SimState, order: np.ndarray | None = None) -> SimState:
    order = _sort_order(state) if order is None else order
    if np.array_equal(order, np.arange(state.n)):
        return state
    return replace(
        state,
        r=state.r[order],
        vr=state.vr[order],
        L=state.L[order],
        m=state.m[order],
        ids=state.ids[order],
        forcing=None if state.forcing is None else state.forcing[order],
        tangent=None if state.tangent is None else state.tangent[order],
        tangent_valid=None if state.tangent_valid is None else state.tangent_valid[order],
        acceleration=None,
    )


def initial_state(
    ensemble: ParticleEnsemble,
    *,
    central_mass: float = 0.0,
    track_tangent: bool = False,
    forcing: np.ndarray | None = None,
) -> SimState:
    """Build the sorted simulation state of a particle ensemble at t = 0.

    Args:
        ensemble (ParticleEnsemble): Particles to evolve.
        central_mass (float): Fixed point mass at the origin.
        track_tangent (bool): Carry the per-particle 2x2 Jacobians, starting at identity.
        forcing (np.ndarray | None): Constant extra radial acceleration per particle,
            aligned with the ensemble order.

    Raises:
        IntegrationError: If a particle sits at the center with angular momentum.
    """
    n = ensemble.n
    if forcing is not None and np.shape(forcing) != (n,):
        raise IntegrationError(f"Forcing must have shape ({n},), got {np.shape(forcing)}")
    state = SimState(
        r=np.array(ensemble.r),
        vr=np.array(ensemble.vr),
        L=np.array(ensemble.L),
        m=np.array(ensemble.m),
        ids=np.array(ensemble.ids),
        t=0.0,
        gamma=ensemble.gamma,
        P=0.0,
        Q=0.0,
        initial_support=0.0,
        total_mass=math.fsum(ensemble.m),
        central_mass=central_mass,
        forcing=None if forcing is None else np.array(forcing, dtype=np.float64),
        tangent=np.tile(np.eye(2), (n, 1, 1)) if track_tangent else None,
        tangent_valid=np.ones(n, dtype=bool) if track_tangent else None,
    )
    state = _sorted(state)
    q0 = float(state.r.max(initial=0.0))
    state.P = float(state.speeds().max(initial=0.0))
    state.Q = q0
    state.initial_support = q0
    state.acceleration = accelerate(state)
    return state


def _field_acceleration(
    enclosed_mass: np.ndarray, r: np.ndarray, L: np.ndarray, gamma: int, central_mass: float
) -> np.ndarray:
    return (-gamma * enclosed_mass - central_mass) / (r * r) + L * L / (r * r * r)


def accelerate(state: SimState) -> np.ndarray:
    """Radial acceleration a_i = -gamma M(r_i)/r_i^2 - M_c/r_i^2 + L_i^2/r_i^3 (+ forcing).

    M(r_i) counts every particle below r_i (ties broken by id) plus half of
    particle i itself. A particle at the center with L = 0 feels no force.

    Raises:
        IntegrationError: If a particle sits at r = 0 with L > 0.
    """
    at_center = state.r <= 0
    if np.any(at_center & (state.L > 0)):
        raise IntegrationError("Particle at r=0 carries angular momentum")
    enclosed = EnclosedMass.from_particles(state)
    half = np.empty(state.n)
    half[enclosed.order] = enclosed.half_self()
    with np.errstate(divide="ignore", invalid="ignore"):
        a = _field_acceleration(half, state.r, state.L, state.gamma, state.central_mass)
    a[at_center] = 0.0
    if state.forcing is not None:
        a = a + state.forcing
    return a


def _stiffness(state: SimState, stencil: float) -> tuple[np.ndarray, np.ndarray]:
    """Centered difference of the field acceleration in r, and stencil validity."""
    enclosed = EnclosedMass.from_particles(state)
    r, L = state.r, state.L
    outer = r + stencil
    inner = r - stencil
    valid = inner > 0
    # stencils reaching the center fall back to a forward difference
    inner = np.where(valid, inner, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_outer = _field_acceleration(
            enclosed.at(outer), outer, L, state.gamma, state.central_mass
        )
        a_inner = _field_acceleration(
            enclosed.at(inner), inner, L, state.gamma, state.central_mass
        )
        stiffness = (a_outer - a_inner) / (outer - inner)
    stiffness = np.where(np.isfinite(stiffness), stiffness, 0.0)
    return stiffness, valid & (r > 0)


def tangent_step(
    tangent: np.ndarray, stiffness_start: np.ndarray, stiffness_end: np.ndarray, dt: float
) -> np.ndarray:
    """Leapfrog update of the Jacobians for xi' = eta, eta' = (da/dr) xi.

    Row 0 of each matrix is d r / d(r0, vr0) and row 1 is d vr / d(r0, vr0).
    Every substep is a shear, so the determinant stays one.

    Args:
        tangent (np.ndarray): (n, 2, 2) Jacobians at the start of the step.
        stiffness_start (np.ndarray): da/dr at the old positions.
        stiffness_end (np.ndarray): da/dr at the drifted positions.
        dt (float): Step size.

    Returns:
        The (n, 2, 2) Jacobians at the end of the step.
    """
    position = tangent[:, 0, :]
    velocity = tangent[:, 1, :] + 0.5 * dt * stiffness_start[:, None] * position
    position = position + dt * velocity
    velocity = velocity + 0.5 * dt * stiffness_end[:, None] * position
    return np.stack([position, velocity], axis=1)


def tangent_operator_norm(tangent: np.ndarray) -> np.ndarray:
    """Largest singular value of each 2x2 matrix."""
    a, b = tangent[:, 0, 0], tangent[:, 0, 1]
    c, d = tangent[:, 1, 0], tangent[:, 1, 1]
    frobenius = a * a + b * b + c * c + d * d
    determinant = a * d - b * c
    discriminant = np.sqrt(np.maximum(frobenius * frobenius - 4.0 * determinant**2, 0.0))
    return np.sqrt(0.5 * (frobenius + discriminant))


def step(state: SimState, dt: float, stencil: float = DEFAULT_STENCIL) -> SimState:
    """Advance the state by one kick-drift-kick step.

    Args:
        state (SimState): Sorted state with its acceleration.
        dt (float): Step size, positive.
        stencil (float): Finite-difference stencil of the tangent stiffness.

    Raises:
        IntegrationError: On a nonpositive step, a particle with L > 0 reaching
            the center, or a non-finite state.

    Returns:
        A new state at t + dt, sorted by (r, id), with updated running P and Q.
    """
    if not dt > 0:
        raise IntegrationError(f"Time step must be positive, got {dt}")
    a = state.acceleration if state.acceleration is not None else accelerate(state)
    if state.tracks_tangent:
        stiffness_start, valid_start = _stiffness(state, stencil)

    vr = state.vr + 0.5 * dt * a
    r = state.r + dt * vr
    crossed = r < 0
    if np.any((r <= 0) & (state.L > 0)):
        raise IntegrationError(
            f"Particle with angular momentum reached the center at t={state.t + dt:g}; "
            f"step {dt:g} is too large"
        )
    r[crossed] = -r[crossed]
    vr[crossed] = -vr[crossed]

    tangent = valid = None
    if state.tracks_tangent:
        # the reflection negates both rows; it commutes with the linear tangent update
        tangent = np.where(crossed[:, None, None], -state.tangent, state.tangent)
        valid = valid_start & ~crossed

    moved = replace(
        state,
        r=r,
        vr=vr,
        t=state.t + dt,
        tangent=tangent,
        tangent_valid=valid,
        acceleration=None,
    )
    order = _sort_order(moved)
    moved = _sorted(moved, order)
    a_new = accelerate(moved)
    moved.vr = moved.vr + 0.5 * dt * a_new
    moved.acceleration = a_new

    if moved.tracks_tangent:
        stiffness_end, valid_end = _stiffness(moved, stencil)
        moved.tangent = tangent_step(moved.tangent, stiffness_start[order], stiffness_end, dt)
        moved.tangent_valid = moved.tangent_valid & valid_end

    if not (np.all(np.isfinite(moved.r)) and np.all(np.isfinite(moved.vr))):
        raise IntegrationError(f"Non-finite particle state at t={moved.t:g}")
    moved.P = max(state.P, float(moved.speeds().max(initial=0.0)))
    moved.Q = max(state.Q, float(moved.r.max(initial=0.0)))
    return moved


def total_energy(state: SimState) -> float:
    """Kinetic plus interaction energy of the half-self particle system.

    The interaction term -gamma sum_i m_i M_half(r_i)/r_i is the potential whose
    gradient gives the integrated forces; the central mass adds -M_c sum m_i/r_i.
    """
    enclosed = EnclosedMass.from_particles(state)
    half = np.empty(state.n)
    half[enclosed.order] = enclosed.half_self()
    positive = state.r > 0
    r, m, L = state.r[positive], state.m[positive], state.L[positive]
    kinetic = 0.5 * np.sum(state.m * state.vr**2) + 0.5 * np.sum(m * (L / r) ** 2)
    potential = -np.sum(m * (state.gamma * half[positive] + state.central_mass) / r)
    return float(kinetic + potential)


def _metrics_row(state: SimState, snapshot: FieldSnapshot) -> dict[str, float]:
    if state.tracks_tangent:
        norms = tangent_operator_norm(state.tangent)[state.tangent_valid]
        tangent_sup = float(norms.max()) if norms.size else math.nan
        invalid = 1.0 - float(np.count_nonzero(state.tangent_valid)) / max(state.n, 1)
    else:
        tangent_sup, invalid = math.nan, math.nan
    try:
        key_ratio = verify_key_estimate(snapshot)
    except FieldError:
        key_ratio = math.nan
    return {
        "t": state.t,
        "P": state.P,
        "Q": state.Q,
        "rho_sup": snapshot.sup_density,
        "force_sup": snapshot.sup_force,
        "u_sup": snapshot.sup_potential,
        "mass": math.fsum(state.m),
        "energy": total_energy(state),
        "tangent_sup": tangent_sup,
        "key_ratio": key_ratio,
        "max_r2_force": snapshot.max_r2_force,
        "min_bound": min_bound_constant(snapshot, state.P),
        "invalid_fraction": invalid,
        "support_bound": state.support_bound,
    }


def integrate(
    state: SimState,
    T: float,
    dt: float,
    sample_every: int,
    grid: RadialGrid,
    *,
    stencil: float = DEFAULT_STENCIL,
    observer: Observer | None = None,
    width: float = math.nan,
    fvalue_cap: float = math.nan,
) -> RunMetrics:
    """Integrate to time T and sample the field diagnostics.

    Samples are taken at t = 0, every `sample_every` steps and at the final
    step. When the support leaves the grid the grid is extended once; a second
    escape aborts the run.

    Args:
        state (SimState): Initial sorted state.
        T (float): Horizon, positive.
        dt (float): Fixed step; the number of steps is round(T / dt).
        sample_every (int): Steps between samples, at least 1.
        grid (RadialGrid): Field grid covering the support.
        stencil (float): Tangent stiffness stencil.
        observer (Observer | None): Called with each sampled state and its snapshot.
        width (float): Mollification width, recorded on the metrics.
        fvalue_cap (float): Realized sup-norm cap of f, recorded on the metrics.

    Raises:
        IntegrationError: On invalid arguments, a second grid escape, or a failed step.

    Returns:
        The sampled metrics, including the final state.
    """
    if not T > 0:
        raise IntegrationError(f"Horizon must be positive, got {T}")
    if sample_every < 1:
        raise IntegrationError(f"sample_every must be at least 1, got {sample_every}")
    n_steps = max(1, int(round(T / dt)))
    extended = False
    rows = []

    def sample(current: SimState):
        nonlocal grid, extended
        support = float(current.r.max(initial=0.0))
        if not grid.covers(support):
            if extended:
                raise IntegrationError(
                    f"Support r={support:.6g} escaped the extended grid "
                    f"(r_max={grid.r_max:.6g}) at t={current.t:g}"
                )
            grid = grid.extended(max(2.0, 1.5 * support / grid.r_max))
            extended = True
            logger.warning(
                f"Support escaped the grid at t={current.t:g}; extended to r_max={grid.r_max:g}"
            )
        snapshot = build_snapshot(
            current, grid, gamma=current.gamma, t=current.t, support_bound=current.support_bound
        )
        rows.append(_metrics_row(current, snapshot))
        if observer is not None:
            observer(current, snapshot)

    logger.info(f"Integrating {state.n} particles to T={T:g} with dt={dt:g} ({n_steps} steps)")
    sample(state)
    for k in range(1, n_steps + 1):
        state = step(state, dt, stencil)
        if k % sample_every == 0 or k == n_steps:
            sample(state)

    frame = pd.DataFrame(rows, columns=METRICS_COLUMNS + AUXILIARY_COLUMNS)
    metrics = RunMetrics(
        frame=frame,
        dt=dt,
        width=width,
        fvalue_cap=fvalue_cap,
        n_particles=state.n,
        gamma=state.gamma,
        grid=grid,
        grid_extended=extended,
        final_state=state,
    )
    if state.tracks_tangent and metrics.max_invalid_fraction > INVALID_TANGENT_WARNING:
        logger.warning(
            f"Tangent invalidated on {metrics.max_invalid_fraction:.1%} of particles in the run"
        )
    logger.info(f"Finished at t={state.t:g}: P={state.P:.6g}, Q={state.Q:.6g}")
    return metrics
