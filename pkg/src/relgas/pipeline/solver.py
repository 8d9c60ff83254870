"""
Method-of-lines integrator for the Lagrangian gas equation
----------------------------------------------------------
Semi-discretisation: u_t = w, w_t = accel(...) at every free node, with
second-order spatial stencils (periodic wrap or one-sided at walls; wall
nodes stay at rest).  Time stepping: classical RK4 at a fixed dt chosen
once per run from the characteristic speeds of the initial state, rounded
so that snapshots fall exactly on multiples of stride * dt and the last
one on t_end.

Characteristic speeds lambda solve A lambda^2 - B lambda + C = 0 with the
main-equation coefficients; C <= 0 and A > 0 make them real for gamma <= 2.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union
import logging
import math

import numpy as np

from ..errors import (
    GUARD_ERRORS,
    ConfigError,
    DegenerateDenominator,
    LossOfHyperbolicity,
    NumericalBlowUp,
    RelGasError,
    SuperluminalState,
)
from ..tools.core import DEFAULT_DENOMINATOR_GUARD, accel, check_gamma, quasilinear_coefficients
from ..tools.entropy import EntropyProfile
from ..tools.lagrangian_grid import Grid, SimState, Trajectory, spatial_derivs
from .initial_conditions import InitialCondition, build_state, validate_state

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.4
DEFAULT_VELOCITY_MARGIN = 1e-6
DUST_DT_FRACTION = 0.25


@dataclass(frozen=True)
class SolverConfig:
    gamma: float
    profile: EntropyProfile
    grid: Grid
    cfl: float = DEFAULT_CFL
    t_end: float = 1.0
    stride: int = 1
    velocity_margin: float = DEFAULT_VELOCITY_MARGIN
    denominator_guard: float = DEFAULT_DENOMINATOR_GUARD
    dt_max: Optional[float] = None
    dt: Optional[float] = None

    def __post_init__(self):
        check_gamma(self.gamma)
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ConfigError(f"stride must be a positive integer, got {self.stride!r}")
        if not (0.0 <= self.velocity_margin < 1.0):
            raise ConfigError(f"velocity_margin must lie in [0, 1), got {self.velocity_margin!r}")
        if self.dt_max is not None and not self.dt_max > 0.0:
            raise ConfigError(f"dt_max must be positive, got {self.dt_max!r}")
        if self.dt is not None and not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        self.profile.check_domain(self.grid.xi_min, self.grid.xi_max)
        if self.grid.periodic and not self.profile.is_constant:
            logger.warning(f"periodic grid with non-constant entropy {self.profile.label()}: "
                           "S0 jumps at the seam")

    @cached_property
    def entropy_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        S0, S0p, _, _ = self.profile.derivs(self.grid.xi)
        return np.asarray(S0), np.asarray(S0p)

    @property
    def default_dt_max(self) -> float:
        return DUST_DT_FRACTION * self.grid.dxi


def _check_velocity(state: SimState, config: SolverConfig) -> None:
    limit = 1.0 - config.velocity_margin
    bad = ~(np.abs(state.w) < limit)
    if np.any(bad):
        node = int(np.flatnonzero(bad)[0])
        raise SuperluminalState(f"|w| = {float(abs(state.w[node]))!r} >= {limit!r}",
                                node=node, time=state.t)


def rhs(state: SimState, config: SolverConfig) -> Tuple[np.ndarray, np.ndarray]:
    """(du/dt, dw/dt) of the semi-discrete system."""
    _check_velocity(state, config)
    phi_xi, phi_xixi, phi_txi = spatial_derivs(state, config.grid)
    S0, S0p = config.entropy_nodes
    dw = np.zeros_like(state.w)
    sl = slice(None) if config.grid.periodic else slice(1, -1)
    offset = 0 if config.grid.periodic else 1
    try:
        dw[sl] = accel(state.w[sl], phi_xi[sl], phi_txi[sl], phi_xixi[sl],
                       S0[sl], S0p[sl], config.gamma, config.denominator_guard)
    except RelGasError as exc:
        node = None if exc.node is None else exc.node + offset
        raise exc.relocated(node=node, time=state.t) from exc
    return state.w.copy(), dw


def characteristic_speeds(state: SimState, config: SolverConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Roots (lambda_minus, lambda_plus) of A lambda^2 - B lambda + C = 0 at every node."""
    phi_xi, _, _ = spatial_derivs(state, config.grid)
    S0, _ = config.entropy_nodes
    try:
        A, B, C, _ = (np.asarray(c) for c in quasilinear_coefficients(state.w, phi_xi, S0, config.gamma))
    except RelGasError as exc:
        raise exc.relocated(time=state.t) from exc
    small = np.abs(A) <= config.denominator_guard
    if np.any(small):
        raise DegenerateDenominator("phi_tt coefficient vanishes",
                                    node=int(np.flatnonzero(small)[0]), time=state.t)
    disc = B * B - 4.0 * A * C
    if np.any(disc < 0.0):
        node = int(np.flatnonzero(disc < 0.0)[0])
        raise LossOfHyperbolicity(f"characteristic discriminant {float(disc[node])!r} < 0",
                                  node=node, time=state.t)
    root = np.sqrt(disc)
    return (B - root) / (2.0 * A), (B + root) / (2.0 * A)


def stable_dt(state: SimState, config: SolverConfig) -> float:
    """cfl * dxi / max |lambda|, never above dt_max (default 0.25 dxi)."""
    lam_minus, lam_plus = characteristic_speeds(state, config)
    fastest = float(max(np.max(np.abs(lam_minus)), np.max(np.abs(lam_plus))))
    cap = config.dt_max if config.dt_max is not None else config.default_dt_max
    if fastest == 0.0:
        return cap
    return min(config.cfl * config.grid.dxi / fastest, cap)


def _stage(state: SimState, t: float, du: np.ndarray, dw: np.ndarray, h: float) -> SimState:
    return SimState(t, state.u + h * du, state.w + h * dw)


def step_rk4(state: SimState, dt: float, config: SolverConfig) -> SimState:
    """One classical RK4 step; the new state is revalidated before it is returned."""
    t = state.t
    k1u, k1w = rhs(state, config)
    k2u, k2w = rhs(_stage(state, t + 0.5 * dt, k1u, k1w, 0.5 * dt), config)
    k3u, k3w = rhs(_stage(state, t + 0.5 * dt, k2u, k2w, 0.5 * dt), config)
    k4u, k4w = rhs(_stage(state, t + dt, k3u, k3w, dt), config)
    u = state.u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    w = state.w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    new = SimState(t + dt, u, w)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w))):
        bad = ~(np.isfinite(u) & np.isfinite(w))
        raise NumericalBlowUp("non-finite state after RK4 step",
                              node=int(np.flatnonzero(bad)[0]), time=new.t)
    _check_velocity(new, config)
    spatial_derivs(new, config.grid)
    return new


def plan_steps(dt0: float, config: SolverConfig) -> Tuple[int, float]:
    """Step count (multiple of stride) and the uniform dt <= dt0 reaching t_end."""
    chunk = config.stride * dt0
    n_chunks = max(1, int(math.ceil(config.t_end / chunk - 1e-12)))
    n_steps = n_chunks * config.stride
    return n_steps, config.t_end / n_steps


def run(config: SolverConfig, initial_condition: Union[SimState, InitialCondition],
        config_hash: str = "") -> Trajectory:
    """
    Integrate to t_end.  Invalid initial data raises; a guard tripped while
    stepping ends the run early and is recorded in ``Trajectory.failure``.
    """
    grid = config.grid
    if isinstance(initial_condition, InitialCondition):
        state = build_state(initial_condition, grid, config.profile, config.gamma)
    else:
        state = initial_condition.copy()
    validate_state(state, grid, config.velocity_margin)

    dt0 = config.dt if config.dt is not None else stable_dt(state, config)
    n_steps, dt = plan_steps(dt0, config)
    t0 = state.t
    logger.info(f"Integrating N={grid.n} ({grid.boundary}) to t={config.t_end!r}: "
                f"{n_steps} steps of dt={dt:.6g}, stride {config.stride}")

    traj = Trajectory(grid=grid, snapshots=[state], dt=dt, stride=config.stride,
                      n_steps=n_steps, config_hash=config_hash)
    for i in range(n_steps):
        try:
            state = step_rk4(state, dt, config)
        except GUARD_ERRORS as exc:
            traj.failure = {
                "error": type(exc).__name__,
                "message": str(exc),
                "step": i + 1,
                "node": exc.node,
                "time": exc.time,
            }
            logger.error(f"Run stopped: {exc}")
            break
        state.t = t0 + (i + 1) * dt
        if (i + 1) % config.stride == 0:
            traj.snapshots.append(state)
            try:
                limit = stable_dt(state, config)
            except GUARD_ERRORS as exc:
                limit = 0.0
                logger.warning(f"stable_dt unavailable at t={state.t!r}: {exc}")
            if dt > limit:
                traj.guard_events.append({"event": "cfl_exceeded", "t": state.t,
                                          "dt": dt, "stable_dt": limit})
                logger.warning(f"dt={dt:.6g} exceeds stable_dt={limit:.6g} at t={state.t:.6g}")
    return traj
