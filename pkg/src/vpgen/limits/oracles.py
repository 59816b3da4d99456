"""High-accuracy oracles for the shell n-body and cold Euler-Poisson limits.

Both oracles move Lagrangian labels under r'' = -mu / r^2. Between shell
crossings every mu is constant, so each segment is a smooth ODE integrated
with classic fourth-order Runge-Kutta; crossings are located by bisection on
the Runge-Kutta substep, and the final approach to the center is taken from
the closed-form radial Kepler solution.
"""

__all__ = [
    "DEFAULT_ORACLE_RATIO",
    "cold_euler_oracle",
    "radial_infall_time",
    "shell_oracle",
]

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import integrate

from vpgen.limits.model import OracleError, OracleEvent, OracleEventKind, OracleTrajectory
from vpgen.scales.model import ColdDatum, Shell, ShellDatum

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_RATIO = 100
DEFAULT_LABELS = 512
CROSSING_TOLERANCE = 1e-10
# remaining infall times below this many substeps are taken from the closed form
CENTER_STEPS = 10.0


def radial_infall_time(r0: float, v0: float, mu: float) -> float:
    """Time for r'' = -mu / r^2 started at (r0, v0) to reach r = 0.

    Bound orbits (negative energy) follow the cycloid r = a (1 - cos eta),
    t = sqrt(a^3 / mu) (eta - sin eta); unbound infall is integrated by
    quadrature. Returns inf when the center is never reached.
    """
    if r0 <= 0:
        return 0.0
    if mu <= 0:
        if mu == 0 and v0 < 0:
            return r0 / -v0
        return math.inf
    energy = 0.5 * v0 * v0 - mu / r0
    if energy < 0:
        a = -mu / (2.0 * energy)
        # phase of the outgoing branch, 1 - cos eta = r0 / a
        eta = 2.0 * math.asin(math.sqrt(min(1.0, 0.5 * r0 / a)))
        inward = _phase_area(eta)
        remaining = inward if v0 < 0 else 2.0 * math.pi - inward
        return math.sqrt(a**3 / mu) * remaining
    if v0 >= 0:
        return math.inf
    value, _ = integrate.quad(
        lambda r: 1.0 / math.sqrt(2.0 * (energy + mu / r)), 0.0, r0, epsabs=1e-13, epsrel=1e-12
    )
    return value


def _phase_area(eta: float) -> float:
    """eta - sin eta, by its series where the difference cancels."""
    if eta < 1e-2:
        eta2 = eta * eta
        return eta * eta2 / 6.0 * (1.0 - eta2 / 20.0 * (1.0 - eta2 / 42.0))
    return eta - math.sin(eta)


def _rk4(r: np.ndarray, v: np.ndarray, mu: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    def accel(x: np.ndarray) -> np.ndarray:
        return -mu / (x * x)

    k1r, k1v = v, accel(r)
    k2r, k2v = v + 0.5 * h * k1v, accel(r + 0.5 * h * k1r)
    k3r, k3v = v + 0.5 * h * k2v, accel(r + 0.5 * h * k2r)
    k4r, k4v = v + h * k3v, accel(r + h * k3r)
    return (
        r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )


def _half_self_mu(order: np.ndarray, masses: np.ndarray, gamma: int) -> np.ndarray:
    ordered = masses[order]
    mu = np.empty_like(masses)
    mu[order] = gamma * (np.cumsum(ordered) - 0.5 * ordered)
    return mu


def _crossing_time(
    r: np.ndarray, v: np.ndarray, mu: np.ndarray, h: float, inner: int, outer: int
) -> float:
    """Bisection for the substep tau at which label `outer` comes down to label `inner`."""
    lo, hi = 0.0, h
    while hi - lo > CROSSING_TOLERANCE:
        mid = 0.5 * (lo + hi)
        x, _ = _rk4(r, v, mu, mid)
        if x[outer] - x[inner] < 0:
            hi = mid
        else:
            lo = mid
    return hi


class _LabelIntegrator:
    """Advances labels over fixed record intervals, handling crossings and the center."""

    def __init__(
        self,
        r0: np.ndarray,
        v0: np.ndarray,
        masses: np.ndarray,
        gamma: int,
        fixed_mu: np.ndarray | None,
        stop_at_crossing: bool,
    ):
        self.r = np.array(r0, dtype=np.float64)
        self.v = np.array(v0, dtype=np.float64)
        self.masses = masses
        self.gamma = gamma
        self.fixed_mu = fixed_mu
        self.stop_at_crossing = stop_at_crossing
        self.order = np.lexsort((np.arange(self.r.size), self.r))
        self.mu = fixed_mu if fixed_mu is not None else _half_self_mu(self.order, masses, gamma)
        self.t = 0.0
        self.events: list[OracleEvent] = []
        self.stopped = False

    def _center_time(self, h: float) -> float:
        reach = 2.0 * CENTER_STEPS * h
        approaching = (self.v < 0) & (self.r < reach * np.abs(self.v))
        near = (self.mu > 0) & (approaching | (self.r**3 < reach * reach * self.mu))
        times = [
            radial_infall_time(float(self.r[i]), float(self.v[i]), float(self.mu[i]))
            for i in np.flatnonzero(near)
        ]
        return min(times, default=math.inf)

    def advance(self, h: float):
        remaining = h
        while remaining > 1e-15 and not self.stopped:
            center = self._center_time(remaining)
            if center < CENTER_STEPS * remaining:
                self.t += center
                self.events.append(OracleEvent(self.t, OracleEventKind.CENTER, ()))
                self.stopped = True
                return
            r1, v1 = _rk4(self.r, self.v, self.mu, remaining)
            if not (np.all(np.isfinite(r1)) and np.all(r1 > 0)):
                raise OracleError(f"Oracle lost accuracy near the center at t={self.t:g}")
            gaps = r1[self.order[1:]] - r1[self.order[:-1]]
            crossing = np.flatnonzero(gaps < 0)
            if crossing.size == 0:
                self.r, self.v = r1, v1
                self.t += remaining
                return
            taus = [
                _crossing_time(
                    self.r, self.v, self.mu, remaining, self.order[k], self.order[k + 1]
                )
                for k in crossing
            ]
            first = int(np.argmin(taus))
            tau, k = taus[first], int(crossing[first])
            self.r, self.v = _rk4(self.r, self.v, self.mu, tau)
            self.t += tau
            remaining -= tau
            pair = (int(self.order[k]), int(self.order[k + 1]))
            self.events.append(OracleEvent(self.t, OracleEventKind.CROSSING, pair))
            if self.stop_at_crossing:
                self.stopped = True
                return
            self.order[k], self.order[k + 1] = self.order[k + 1], self.order[k]
            self.mu = _half_self_mu(self.order, self.masses, self.gamma)


def _run_labels(
    integrator: _LabelIntegrator,
    labels: np.ndarray,
    T: float,
    dt: float,
    ratio: int,
    record_every: int,
) -> OracleTrajectory:
    if not (T > 0 and dt > 0 and ratio >= 1 and record_every >= 1):
        raise OracleError(
            f"Invalid oracle parameters T={T}, dt={dt}, ratio={ratio}, record_every={record_every}"
        )
    substep = dt / ratio
    n_steps = max(1, int(round(T / substep)))
    times, radii, velocities = [0.0], [integrator.r.copy()], [integrator.v.copy()]
    for k in range(1, n_steps + 1):
        integrator.advance(substep)
        if integrator.stopped:
            break
        if k % record_every == 0 or k == n_steps:
            times.append(integrator.t)
            radii.append(integrator.r.copy())
            velocities.append(integrator.v.copy())
    stop_time = integrator.t
    return OracleTrajectory(
        times=np.asarray(times),
        r=np.vstack(radii),
        vr=np.vstack(velocities),
        masses=integrator.masses,
        labels=labels,
        gamma=integrator.gamma,
        events=integrator.events,
        stop_time=stop_time,
    )


def shell_oracle(
    shells: ShellDatum | Sequence[Shell],
    gamma: int,
    T: float,
    dt: float,
    ratio: int = DEFAULT_ORACLE_RATIO,
    record_every: int | None = None,
) -> OracleTrajectory:
    """Integrate concentrated shells r_k'' = -gamma M_k / r_k^2 with half-self masses.

    Args:
        shells (ShellDatum | Sequence[Shell]): Shells with distinct radii.
        gamma (int): Coupling sign.
        T (float): Horizon.
        dt (float): Particle-run step; the oracle substep is dt / ratio.
        ratio (int): Substeps per particle-run step.
        record_every (int | None): Substeps between records; defaults to `ratio`.

    Raises:
        OracleError: For coincident radii or invalid parameters.

    Returns:
        The trajectory, stopped at the first center event if any.
    """
    shells = tuple(shells.shells if isinstance(shells, ShellDatum) else shells)
    r0 = np.array([shell.radius for shell in shells], dtype=np.float64)
    if np.unique(r0).size != r0.size:
        raise OracleError(f"Shell radii must be distinct, got {r0.tolist()}")
    integrator = _LabelIntegrator(
        r0,
        np.array([shell.velocity for shell in shells], dtype=np.float64),
        np.array([shell.mass for shell in shells], dtype=np.float64),
        gamma,
        fixed_mu=None,
        stop_at_crossing=False,
    )
    trajectory = _run_labels(
        integrator, np.arange(r0.size), T, dt, ratio, record_every or ratio
    )
    logger.info(
        f"Shell oracle: {len(trajectory.events)} events, stopped at t={trajectory.stop_time:.10g}"
    )
    return trajectory


def cold_euler_oracle(
    datum: ColdDatum,
    T: float,
    dt: float,
    labels: int = DEFAULT_LABELS,
    ratio: int = DEFAULT_ORACLE_RATIO,
    record_every: int | None = None,
) -> OracleTrajectory:
    """Lagrangian cold-fluid oracle: each label keeps mu = gamma M(r0) until the first crossing.

    Labels sit at the mass midpoints (k + 1/2)/labels of the datum and start
    with the datum velocity. Integration stops at the first crossing of two
    labels or when a label reaches the center; that time is the oracle horizon.
    """
    if labels < 2:
        raise OracleError(f"Need at least two labels, got {labels}")
    fractions = (np.arange(labels) + 0.5) / labels
    r0 = datum.radius_of_mass_fraction(fractions)
    masses = np.full(labels, datum.mass / labels)
    integrator = _LabelIntegrator(
        r0,
        datum.velocity_at(r0),
        masses,
        datum.gamma,
        fixed_mu=datum.gamma * datum.enclosed_mass(r0),
        stop_at_crossing=True,
    )
    trajectory = _run_labels(
        integrator, np.arange(labels), T, dt, ratio, record_every or ratio
    )
    logger.info(f"Cold Euler oracle valid until t={trajectory.horizon:.10g}")
    return trajectory
