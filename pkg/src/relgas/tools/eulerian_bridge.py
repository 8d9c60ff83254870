"""
Lagrangian -> Eulerian mapping and Eulerian checks.

    x = phi(xi, t),  v = phi_t,  m = 1/phi_xi,  n = m Gamma,  S = S0(xi)

Eulerian densities come in two flavours:
    printed       the tabulated Eulerian analogs (pointwise substitution of the
                  Lagrangian densities, x for phi and 1/m for phi_xi)
    conservative  (m T^t, T^xi + v m T^t), which satisfies
                  d_t(m T^t) + d_x(T^xi + v m T^t) = 0 in (x, t)

The differential constraints on S are evaluated with rho = m.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple
import logging

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import InsufficientSnapshots, NonPositiveStretch, NotApplicable, OutOfRange
from .conservation_laws import builtin_laws
from .core import Jet1, check_gamma, gamma_factor
from .entropy import EntropyProfile
from .lagrangian_grid import Grid, SimState, Trajectory, spatial_derivs

logger = logging.getLogger(__name__)

CONSTRAINT_KINDS = ("exponential", "power")


@dataclass(eq=False)
class EulerianSnapshot:
    t: float
    x: np.ndarray
    v: np.ndarray
    m: np.ndarray
    n: np.ndarray
    S: np.ndarray
    xi: np.ndarray

    @property
    def uniform(self) -> bool:
        dx = np.diff(self.x)
        return bool(np.allclose(dx, dx[0], rtol=1e-10, atol=0.0))


def to_eulerian(state: SimState, grid: Grid, profile: EntropyProfile) -> EulerianSnapshot:
    phi_xi, _, _ = spatial_derivs(state, grid)
    xi = grid.xi
    x = xi + state.u
    if np.any(np.diff(x) <= 0.0):
        node = int(np.flatnonzero(np.diff(x) <= 0.0)[0])
        raise NonPositiveStretch("mapped positions are not strictly increasing", node=node, time=state.t)
    v = state.w.copy()
    m = 1.0 / phi_xi
    n = m * np.asarray(gamma_factor(v))
    S = np.asarray(profile.value(xi), dtype=float) * np.ones_like(xi)
    return EulerianSnapshot(float(state.t), x, v, m, n, S, xi.copy())


def resample(snapshot: EulerianSnapshot, x_grid: Sequence[float]) -> EulerianSnapshot:
    """Monotone cubic (PCHIP) interpolation of v, m, S and xi onto x_grid; n = m Gamma."""
    xg = np.asarray(x_grid, dtype=float)
    lo, hi = float(snapshot.x[0]), float(snapshot.x[-1])
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if xg.min() < lo - slack or xg.max() > hi + slack:
        raise OutOfRange(f"resampling grid [{xg.min()!r}, {xg.max()!r}] leaves [{lo!r}, {hi!r}]")
    xg = np.clip(xg, lo, hi)

    def interp(values: np.ndarray) -> np.ndarray:
        return PchipInterpolator(snapshot.x, values, extrapolate=False)(xg)

    v = interp(snapshot.v)
    m = interp(snapshot.m)
    S = interp(snapshot.S)
    xi = interp(snapshot.xi)
    n = m * np.asarray(gamma_factor(v))
    return EulerianSnapshot(snapshot.t, xg, v, m, n, S, xi)


def common_x_grid(snapshots: Sequence[EulerianSnapshot], nx: int) -> np.ndarray:
    """Uniform grid covering the interval shared by every snapshot."""
    lo = max(float(s.x[0]) for s in snapshots)
    hi = min(float(s.x[-1]) for s in snapshots)
    if not hi > lo:
        raise OutOfRange("snapshots share no common x interval")
    return np.linspace(lo, hi, int(nx))


def map_trajectory(trajectory: Trajectory, profile: EntropyProfile, nx: int,
                   threads: int = 1) -> List[EulerianSnapshot]:
    """Map every snapshot and resample all of them onto one uniform x grid."""
    grid = trajectory.grid
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        mapped = list(executor.map(lambda s: to_eulerian(s, grid, profile), trajectory.snapshots))
        xg = common_x_grid(mapped, nx)
        return list(executor.map(lambda s: resample(s, xg), mapped))


# ------------------------------ densities ------------------------------ #

def g_factor_eulerian(v, m, S, gamma: float):
    """G^E = 1 + gamma S m^(gamma-1) Gamma^(gamma-1) / (gamma-1)."""
    Gm = np.asarray(gamma_factor(v))
    return 1.0 + gamma * np.asarray(S) * np.asarray(m) ** (gamma - 1.0) * Gm ** (gamma - 1.0) / (gamma - 1.0)


def eulerian_densities(snapshot: EulerianSnapshot, gamma: float, profile: EntropyProfile,
                       form: str = "printed") -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """
    Eulerian analogs (eT^t, T^x) for every law the profile admits.  With
    form="derived" the T3 time density is x T2^t - t T1^t instead of the
    tabulated expression.
    """
    check_gamma(gamma)
    g = gamma
    t = snapshot.t
    x, v, m, S = snapshot.x, snapshot.v, snapshot.m, snapshot.S
    Gm = np.asarray(gamma_factor(v))
    G = g_factor_eulerian(v, m, S, g)
    out: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
    names = [law.name for law in builtin_laws(profile, g)]
    t1 = (v * G / Gm, Gm ** g * S * m ** g)
    t2 = (G / Gm - S * Gm ** g * m ** (g - 1.0), S * Gm ** g * v * m ** g)
    out["T1"] = t1
    out["T2"] = t2
    t3x = S * Gm ** g * (x * v - t) * m ** g
    if form == "printed":
        out["T3"] = (x / Gm * (1.0 - S * m ** (g - 1.0) * Gm ** (g - 2.0)) - t * v * G, t3x)
    else:
        out["T3"] = (x * t2[0] - t * t1[0], t3x)
    if "T5" in names:
        out["T5"] = (v * G / (Gm * m), Gm * G)
    if "T4" in names:
        label = snapshot.xi - profile.offset
        out["T4"] = (
            t * (S * Gm ** g * m ** (g - 1.0) - G / Gm) + (x + label / m) * v * G / Gm,
            label * Gm * G + S * Gm ** g * m ** g * (x - t * v),
        )
    return {name: out[name] for name in names}


def eulerian_density(snapshot: EulerianSnapshot, gamma: float, profile: EntropyProfile,
                     name: str, form: str = "printed") -> Tuple[np.ndarray, np.ndarray]:
    densities = eulerian_densities(snapshot, gamma, profile, form)
    if name not in densities:
        raise NotApplicable(f"law {name} does not hold for {profile.label()} at gamma={gamma!r}")
    return densities[name]


def eulerian_conservative_densities(snapshot: EulerianSnapshot, gamma: float,
                                    profile: EntropyProfile) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """(m T^t, T^xi + v m T^t) from the Lagrangian laws evaluated at the source labels."""
    jet = Jet1(xi=snapshot.xi, t=np.full_like(snapshot.x, snapshot.t), phi=snapshot.x,
               phi_t=snapshot.v, phi_xi=1.0 / snapshot.m)
    out = {}
    for law in builtin_laws(profile, gamma):
        Tt, Tx = (np.asarray(a) for a in law.evaluate(jet, snapshot.S, gamma))
        out[law.name] = (snapshot.m * Tt, Tx + snapshot.v * snapshot.m * Tt)
    return out


# ------------------------------ residuals ------------------------------ #

@dataclass
class EulerianResiduals:
    continuity: np.ndarray
    entropy: np.ndarray
    momentum: np.ndarray
    gated: Tuple[str, ...] = ("continuity", "entropy")

    def norms(self) -> Dict[str, Dict[str, float]]:
        out = {}
        for name in ("continuity", "entropy", "momentum"):
            r = getattr(self, name)
            out[name] = {
                "rms": float(np.sqrt(np.mean(r * r))),
                "max": float(np.max(np.abs(r))),
                "gated": name in self.gated,
            }
        return out


def eulerian_residuals(snapshots: Sequence[EulerianSnapshot], dt: float, gamma: float) -> EulerianResiduals:
    """
    Centred residuals of m_t + (m v)_x = 0 and S_t + v S_x = 0 (gated) and of
    the momentum equation (reported), at interior times and interior x.
    """
    check_gamma(gamma)
    if len(snapshots) < 3:
        raise InsufficientSnapshots(f"need at least 3 resampled snapshots, got {len(snapshots)}")
    x = snapshots[0].x
    for s in snapshots[1:]:
        if s.x.shape != x.shape or not np.array_equal(s.x, x):
            raise OutOfRange("snapshots are not on a common x grid")
    h = float(x[1] - x[0])
    g = gamma

    def stack(name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in snapshots])

    m, v, S, n = stack("m"), stack("v"), stack("S"), stack("n")

    def d_t(f):
        return (f[2:, 1:-1] - f[:-2, 1:-1]) / (2.0 * dt)

    def d_x(f):
        return (f[1:-1, 2:] - f[1:-1, :-2]) / (2.0 * h)

    def mid(f):
        return f[1:-1, 1:-1]

    continuity = d_t(m) + d_x(m * v)
    entropy = d_t(S) + mid(v) * d_x(S)
    vc, nc, Sc = mid(v), mid(n), mid(S)
    Gm = np.sqrt(1.0 - vc * vc)
    v_t, v_x = d_t(v), d_x(v)
    momentum = (nc * (v_t + vc * v_x)
                + Gm ** 4 * nc ** (g - 1.0) * (g * Sc * d_x(n) + nc * d_x(S))
                + nc ** g * Sc / (g - 1.0) * ((1.0 + vc * vc - g * vc * vc) * v_t + g * (2.0 - g) * vc * v_x))
    return EulerianResiduals(continuity, entropy, momentum)


def constraint_residual(snapshot: EulerianSnapshot, q: float, kind: str) -> np.ndarray:
    """
    Interior residual of the Eulerian entropy constraint, rho = m:
        exponential   S_x - m q S
        power         q m S S_xx + (1 - q) m S_x^2 - q m_x S S_x
    """
    if kind not in CONSTRAINT_KINDS:
        raise ValueError(f"unknown constraint kind {kind!r}; expected one of {CONSTRAINT_KINDS}")
    x, S, m = snapshot.x, snapshot.S, snapshot.m
    h = float(x[1] - x[0])
    S_x = (S[2:] - S[:-2]) / (2.0 * h)
    Sc, mc = S[1:-1], m[1:-1]
    if kind == "exponential":
        return S_x - mc * q * Sc
    S_xx = (S[2:] - 2.0 * S[1:-1] + S[:-2]) / (h * h)
    m_x = (m[2:] - m[:-2]) / (2.0 * h)
    return q * mc * Sc * S_xx + (1.0 - q) * mc * S_x ** 2 - q * m_x * Sc * S_x
