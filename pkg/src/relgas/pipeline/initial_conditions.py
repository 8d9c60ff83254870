"""
Initial-condition presets for the Lagrangian solver.

    rest                     u = 0, w = 0
    sine-displacement(a, k)  u = a sin(kappa (xi - xi_min)), w = 0
    sine-velocity(b, k)      w = b sin(kappa (xi - xi_min))
    gaussian-velocity(b, sigma, xi0)
                             w = b exp(-d^2 / (2 sigma^2)), d = xi - xi0
                             (minimum-image distance on periodic grids)

kappa = 2 pi k / L on periodic grids and pi k / L on wall grids, so both
sine presets vanish at the walls.  On wall grids with non-constant S0 the
pressure-equilibrium map phi_xi ~ S0^(1/gamma) is added to the displacement
(``balanced`` left unset); u = 0 is not a rest state there.  ``balanced =
False`` turns it off, ``True`` on a periodic grid is ignored with a warning.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional
import logging
import math

import numpy as np
from scipy.integrate import quad

from ..errors import ConfigError, DomainError, NonPositiveStretch
from ..tools.entropy import EntropyProfile
from ..tools.lagrangian_grid import Grid, SimState, spatial_derivs

logger = logging.getLogger(__name__)

PRESETS = ("rest", "sine-displacement", "sine-velocity", "gaussian-velocity")


@dataclass(frozen=True)
class InitialCondition:
    name: str = "rest"
    a: float = 0.0
    b: float = 0.0
    k: float = 1.0
    sigma: float = 0.1
    xi0: float = 0.5
    balanced: Optional[bool] = None

    def __post_init__(self):
        if self.name not in PRESETS:
            raise ConfigError(f"unknown initial condition {self.name!r}; expected one of {PRESETS}")
        if self.name in ("sine-velocity", "gaussian-velocity") and not abs(self.b) < 1.0:
            raise ConfigError(f"velocity amplitude must satisfy |b| < 1, got {self.b!r}")
        if self.name == "gaussian-velocity" and not self.sigma > 0.0:
            raise ConfigError(f"gaussian width must be positive, got {self.sigma!r}")

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "a": self.a, "b": self.b, "k": self.k,
                "sigma": self.sigma, "xi0": self.xi0, "balanced": self.balanced}


def _wavenumber(grid: Grid, k: float) -> float:
    if grid.periodic:
        return 2.0 * math.pi * k / grid.length
    return math.pi * k / grid.length


def balanced_displacement(grid: Grid, profile: EntropyProfile, gamma: float) -> np.ndarray:
    """u with phi_xi proportional to S0^(1/gamma) and u = 0 at both ends."""
    def density(x: float) -> float:
        return float(profile.value(x)) ** (1.0 / gamma)

    total, _ = quad(density, grid.xi_min, grid.xi_max, limit=200)
    c = grid.length / total
    xi = grid.xi
    u = np.empty_like(xi)
    for j, x in enumerate(xi):
        partial, _ = quad(density, grid.xi_min, x, limit=200)
        u[j] = c * partial - (x - grid.xi_min)
    if not grid.periodic:
        u[0] = 0.0
        u[-1] = 0.0
    return u


def build_state(ic: InitialCondition, grid: Grid, profile: EntropyProfile, gamma: float,
                t0: float = 0.0) -> SimState:
    xi = grid.xi
    s = xi - grid.xi_min
    u = np.zeros_like(xi)
    w = np.zeros_like(xi)
    if ic.name == "sine-displacement":
        u = ic.a * np.sin(_wavenumber(grid, ic.k) * s)
    elif ic.name == "sine-velocity":
        w = ic.b * np.sin(_wavenumber(grid, ic.k) * s)
    elif ic.name == "gaussian-velocity":
        d = xi - ic.xi0
        if grid.periodic:
            d = np.mod(d + 0.5 * grid.length, grid.length) - 0.5 * grid.length
        w = ic.b * np.exp(-d * d / (2.0 * ic.sigma ** 2))

    balance = ic.balanced if ic.balanced is not None else not grid.periodic
    if balance and not profile.is_constant:
        if grid.periodic:
            logger.warning("pressure-balanced displacement needs wall boundaries; ignored on a periodic grid")
        else:
            u = u + balanced_displacement(grid, profile, gamma)

    if not grid.periodic:
        u[0] = u[-1] = 0.0
        w[0] = w[-1] = 0.0
    return SimState(float(t0), u, w)


def validate_state(state: SimState, grid: Grid, velocity_margin: float = 0.0) -> None:
    """Raise DomainError unless the state satisfies the solver invariants."""
    if state.u.shape != (grid.size,) or state.w.shape != (grid.size,):
        raise DomainError(f"state arrays must have {grid.size} nodes")
    if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.w))):
        raise DomainError("initial state contains non-finite values")
    limit = 1.0 - velocity_margin
    if np.any(np.abs(state.w) >= limit):
        node = int(np.flatnonzero(np.abs(state.w) >= limit)[0])
        raise DomainError(f"initial velocity exceeds {limit!r}", node=node)
    try:
        spatial_derivs(state, grid)
    except NonPositiveStretch as exc:
        raise DomainError(f"initial state: {exc}", node=exc.node) from exc
    if not grid.periodic and (state.w[0] != 0.0 or state.w[-1] != 0.0):
        raise DomainError("wall nodes must start at rest")
