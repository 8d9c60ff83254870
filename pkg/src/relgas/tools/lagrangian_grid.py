"""
Uniform grids in the mass coordinate and the discrete state living on them.

The state stores the displacement u = phi - xi and the velocity w = phi_t.
Periodic grids hold n nodes (the node at xi_max is the image of xi_min);
wall grids hold n + 1 nodes including both walls.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np

from ..errors import ConfigError, InsufficientSnapshots, NonPositiveStretch
from .core import Jet1

logger = logging.getLogger(__name__)

BOUNDARIES = ("periodic", "wall")
MIN_CELLS = 8


@dataclass(frozen=True)
class Grid:
    xi_min: float
    xi_max: float
    n: int
    boundary: str = "periodic"

    def __post_init__(self):
        if not (self.xi_max > self.xi_min):
            raise ConfigError(f"grid needs xi_max > xi_min, got [{self.xi_min!r}, {self.xi_max!r}]")
        if int(self.n) != self.n or self.n < MIN_CELLS:
            raise ConfigError(f"grid needs an integer n >= {MIN_CELLS}, got {self.n!r}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"unknown boundary {self.boundary!r}; expected one of {BOUNDARIES}")

    @property
    def length(self) -> float:
        return self.xi_max - self.xi_min

    @property
    def dxi(self) -> float:
        return self.length / self.n

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def size(self) -> int:
        return self.n if self.periodic else self.n + 1

    @property
    def xi(self) -> np.ndarray:
        if self.periodic:
            return np.linspace(self.xi_min, self.xi_max, self.n, endpoint=False)
        return np.linspace(self.xi_min, self.xi_max, self.n + 1)

    def refined(self, n: int) -> "Grid":
        return Grid(self.xi_min, self.xi_max, int(n), self.boundary)


@dataclass(eq=False)
class SimState:
    t: float
    u: np.ndarray
    w: np.ndarray

    def phi(self, grid: Grid) -> np.ndarray:
        return grid.xi + self.u

    def copy(self) -> "SimState":
        return SimState(float(self.t), self.u.copy(), self.w.copy())


@dataclass(eq=False)
class Trajectory:
    """Snapshots at uniform spacing dt * stride, plus run metadata."""

    grid: Grid
    snapshots: List[SimState]
    dt: float
    stride: int
    n_steps: int = 0
    config_hash: str = ""
    guard_events: List[Dict[str, Any]] = field(default_factory=list)
    failure: Optional[Dict[str, Any]] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def snapshot_dt(self) -> float:
        return self.dt * self.stride

    @property
    def completed(self) -> bool:
        return self.failure is None

    def require(self, count: int = 3) -> None:
        if len(self.snapshots) < count:
            raise InsufficientSnapshots(
                f"need at least {count} snapshots at uniform spacing, got {len(self.snapshots)}"
            )


def _second_difference(f: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / (h * h)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (h * h)
    return out


def first_difference(f: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    return np.gradient(f, h, edge_order=2)


def spatial_derivs(state: SimState, grid: Grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(phi_xi, phi_xixi, phi_txi) with second-order stencils."""
    h = grid.dxi
    periodic = grid.periodic
    phi_xi = 1.0 + first_difference(state.u, h, periodic)
    bad = ~(phi_xi > 0.0)
    if np.any(bad):
        node = int(np.flatnonzero(bad)[0])
        raise NonPositiveStretch(
            f"non-positive stretch phi_xi = {float(phi_xi[node])!r}", node=node, time=state.t
        )
    phi_xixi = _second_difference(state.u, h, periodic)
    phi_txi = first_difference(state.w, h, periodic)
    return phi_xi, phi_xixi, phi_txi


def node_jets(state: SimState, grid: Grid, extend: str = "none") -> Jet1:
    """
    First-order jets at the grid nodes.

    extend = "closure" appends the periodic image of the first node at xi_max;
    extend = "ghost" pads one periodic image node on each side.  Both leave wall
    grids untouched.  Image nodes carry phi shifted by the period so that
    densities with explicit phi or xi are evaluated consistently.
    """
    phi_xi, _, _ = spatial_derivs(state, grid)
    xi = grid.xi
    u, w = state.u, state.w
    if grid.periodic and extend != "none":
        L = grid.length
        if extend == "closure":
            xi = np.concatenate([xi, [xi[0] + L]])
            u = np.concatenate([u, u[:1]])
            w = np.concatenate([w, w[:1]])
            phi_xi = np.concatenate([phi_xi, phi_xi[:1]])
        elif extend == "ghost":
            xi = np.concatenate([[xi[-1] - L], xi, [xi[0] + L]])
            u = np.concatenate([u[-1:], u, u[:1]])
            w = np.concatenate([w[-1:], w, w[:1]])
            phi_xi = np.concatenate([phi_xi[-1:], phi_xi, phi_xi[:1]])
        else:
            raise ValueError(f"unknown extension {extend!r}")
    t = np.full_like(xi, state.t)
    return Jet1(xi=xi, t=t, phi=xi + u, phi_t=w, phi_xi=phi_xi)
