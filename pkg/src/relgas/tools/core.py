"""
Pointwise algebra of the relativistic polytropic gas in mass-Lagrangian coordinates
-----------------------------------------------------------------------------------
All functions accept scalars or numpy arrays (broadcast together) and return
a Python float for scalar input.  Units: c = 1, so Gamma = sqrt(1 - v^2).

Naming: v = phi_t (particle velocity), p = phi_xi (stretch, 1/m).

Lagrangian density:
    L = Gamma + k Gamma^gamma S0 p^(1-gamma),       k = 1/(gamma-1)

Main equation, quasilinear in the second derivatives:
    A phi_tt + B phi_txi + C phi_xixi + D S0' = 0
    A = [gamma k (Gamma^2 (gamma-1) - gamma + 2) S0 + Gamma^(1-gamma) p^(gamma-1)] p^2
    B = -2 gamma Gamma^2 S0 v p
    C = -gamma Gamma^4 S0
    D = Gamma^4 p

The Eulerian density gradient follows the chain rule, m_x = -phi_xi^-3 phi_xixi.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Tuple, Union
import logging
import math

import numpy as np

from ..errors import (
    DegenerateDenominator,
    DomainError,
    NonPositiveStretch,
    SuperluminalState,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_DENOMINATOR_GUARD = 1e-12
EL_ORACLES = ("finite-difference", "symbolic")


def as_output(value: Any) -> ArrayLike:
    """Return a float for 0-d input, the array otherwise."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr


def _first_bad(mask: np.ndarray):
    if mask.ndim == 0:
        return None
    return int(np.flatnonzero(mask.ravel())[0])


def check_gamma(gamma: float) -> float:
    g = float(gamma)
    if not (math.isfinite(g) and g > 1.0):
        raise DomainError(f"adiabatic exponent must satisfy gamma > 1, got {gamma!r}")
    return g


@dataclass(frozen=True)
class GasParams:
    """Adiabatic exponent; light speed is 1 by convention."""

    gamma: float = 5.0 / 3.0

    def __post_init__(self):
        check_gamma(self.gamma)

    @property
    def k(self) -> float:
        return 1.0 / (self.gamma - 1.0)


@dataclass(frozen=True)
class Jet1:
    """First-order jet (xi, t, phi, phi_t, phi_xi); fields may be arrays."""

    xi: ArrayLike
    t: ArrayLike
    phi: ArrayLike
    phi_t: ArrayLike
    phi_xi: ArrayLike

    def validate(self) -> "Jet1":
        gamma_factor(self.phi_t)
        check_stretch(self.phi_xi)
        return self


@dataclass(frozen=True)
class Jet2(Jet1):
    """Second-order jet; adds phi_tt, phi_txi, phi_xixi."""

    phi_tt: ArrayLike = 0.0
    phi_txi: ArrayLike = 0.0
    phi_xixi: ArrayLike = 0.0


def _gamma_array(v: ArrayLike) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    bad = ~(np.abs(v) < 1.0)
    if np.any(bad):
        raise SuperluminalState(
            "superluminal velocity |v| >= 1",
            node=_first_bad(bad),
        )
    return np.sqrt(1.0 - v * v)


def check_stretch(phi_xi: ArrayLike) -> np.ndarray:
    p = np.asarray(phi_xi, dtype=float)
    bad = ~(p > 0.0)
    if np.any(bad):
        raise NonPositiveStretch(
            f"non-positive stretch phi_xi = {float(p.ravel()[_first_bad(bad) or 0])!r}",
            node=_first_bad(bad),
        )
    return p


def gamma_factor(v: ArrayLike) -> ArrayLike:
    """Gamma = sqrt(1 - v^2); raises SuperluminalState for |v| >= 1."""
    return as_output(_gamma_array(v))


def pressure(n: ArrayLike, S: ArrayLike, gamma: float) -> ArrayLike:
    """Polytropic closure p = S n^gamma."""
    g = check_gamma(gamma)
    n = np.asarray(n, dtype=float)
    S = np.asarray(S, dtype=float)
    if np.any(~(n > 0.0)) or np.any(~(S > 0.0)):
        raise DomainError("pressure requires n > 0 and S > 0")
    return as_output(S * n ** g)


def _prepare(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike, gamma: float):
    g = check_gamma(gamma)
    Gm = _gamma_array(phi_t)
    p = check_stretch(phi_xi)
    S = np.asarray(S0, dtype=float)
    if np.any(S < 0.0):
        raise DomainError("entropy S0 must be non-negative")
    return np.asarray(phi_t, dtype=float), p, S, Gm, g


def lagrangian_density(jet: Jet1, S0: ArrayLike, gamma: float) -> ArrayLike:
    v, p, S, Gm, g = _prepare(jet.phi_t, jet.phi_xi, S0, gamma)
    return as_output(Gm + Gm ** g * S * p ** (1.0 - g) / (g - 1.0))


def g_factor(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike, gamma: float) -> ArrayLike:
    """G = 1 + gamma S0 p^(1-gamma) Gamma^(gamma-1) / (gamma-1)."""
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    return as_output(_g(p, S, Gm, g))


def _g(p, S, Gm, g):
    return 1.0 + g * S * p ** (1.0 - g) * Gm ** (g - 1.0) / (g - 1.0)


def kinematic_terms(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike, gamma: float):
    """Validated arrays (v, p, S0, Gamma, G) shared by the density evaluators."""
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    return v, p, S, Gm, _g(p, S, Gm, g)


def _partials(v, p, S, Gm, g):
    G = _g(p, S, Gm, g)
    L_v = -v * G / Gm
    L_p = -S * Gm ** g * p ** (-g)
    L_S = Gm ** g * p ** (1.0 - g) / (g - 1.0)
    return L_v, L_p, L_S


def lagrangian_partials(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike,
                        gamma: float) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Analytic (dL/dphi_t, dL/dphi_xi, dL/dS0)."""
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    return tuple(as_output(x) for x in _partials(v, p, S, Gm, g))


def _coefficients(v, p, S, Gm, g):
    k = 1.0 / (g - 1.0)
    A = (g * k * (Gm ** 2 * (g - 1.0) - g + 2.0) * S + Gm ** (1.0 - g) * p ** (g - 1.0)) * p ** 2
    B = -2.0 * g * Gm ** 2 * S * v * p
    C = -g * Gm ** 4 * S
    D = Gm ** 4 * p
    return A, B, C, D


def quasilinear_coefficients(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike,
                             gamma: float) -> Tuple[ArrayLike, ...]:
    """Coefficients (A, B, C, D) of (phi_tt, phi_txi, phi_xixi, S0') in the main equation."""
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    A, B, C, D = np.broadcast_arrays(*_coefficients(v, p, S, Gm, g))
    return tuple(as_output(x) for x in (A, B, C, D))


def el_residual(jet: Jet2, S0: ArrayLike, S0p: ArrayLike, gamma: float) -> ArrayLike:
    """Left-hand side of the main equation at a second-order jet."""
    v, p, S, Gm, g = _prepare(jet.phi_t, jet.phi_xi, S0, gamma)
    A, B, C, D = _coefficients(v, p, S, Gm, g)
    return as_output(A * np.asarray(jet.phi_tt, dtype=float)
                     + B * np.asarray(jet.phi_txi, dtype=float)
                     + C * np.asarray(jet.phi_xixi, dtype=float)
                     + D * np.asarray(S0p, dtype=float))


def accel(phi_t: ArrayLike, phi_xi: ArrayLike, phi_txi: ArrayLike, phi_xixi: ArrayLike,
          S0: ArrayLike, S0p: ArrayLike, gamma: float,
          denominator_guard: float = DEFAULT_DENOMINATOR_GUARD) -> ArrayLike:
    """Main equation solved for phi_tt."""
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    A, B, C, D = _coefficients(v, p, S, Gm, g)
    small = np.abs(A) <= denominator_guard
    if np.any(small):
        raise DegenerateDenominator(
            f"phi_tt coefficient |A| <= {denominator_guard!r}",
            node=_first_bad(small),
        )
    num = -B * np.asarray(phi_txi, dtype=float) - C * np.asarray(phi_xixi, dtype=float) \
        - D * np.asarray(S0p, dtype=float)
    return as_output(num / A)


# --------------------------- variational oracle --------------------------- #

def _five_point(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _fd_hessian(v, p, S, g):
    def L_v(vv, pp, SS):
        return _partials(vv, pp, SS, np.sqrt(1.0 - vv * vv), g)[0]

    def L_p(vv, pp, SS):
        return _partials(vv, pp, SS, np.sqrt(1.0 - vv * vv), g)[1]

    hv = 1e-4 * (1.0 - v * v)
    hp = 1e-4 * p
    hS = 1e-4 * np.maximum(S, 1.0)
    L_vv = _five_point(lambda x: L_v(x, p, S), v, hv)
    L_vp = _five_point(lambda x: L_v(v, x, S), p, hp)
    L_pv = _five_point(lambda x: L_p(x, p, S), v, hv)
    L_pp = _five_point(lambda x: L_p(v, x, S), p, hp)
    L_pS = _five_point(lambda x: L_p(v, p, x), S, hS)
    return L_vv, L_vp + L_pv, L_pp, L_pS


@lru_cache(maxsize=16)
def _symbolic_hessian(gamma: float):
    import sympy as sp

    v = sp.Symbol("v", real=True)
    p, S = sp.symbols("p S", positive=True)
    g = sp.Float(gamma)
    Gm = sp.sqrt(1 - v ** 2)
    L = Gm + Gm ** g * S * p ** (1 - g) / (g - 1)
    exprs = [
        sp.diff(L, v, 2),
        2 * sp.diff(L, v, p),
        sp.diff(L, p, 2),
        sp.diff(L, p, S),
    ]
    return tuple(sp.lambdify((v, p, S), e, modules="numpy") for e in exprs)


def variational_coefficients(phi_t: ArrayLike, phi_xi: ArrayLike, S0: ArrayLike, gamma: float,
                             method: str = "finite-difference") -> Tuple[ArrayLike, ...]:
    """
    Coefficients of (phi_tt, phi_txi, phi_xixi, S0') in the expanded Euler-Lagrange
    expression D_t L_v + D_xi L_p, i.e. (L_vv, 2 L_vp, L_pp, L_pS).

    ``finite-difference`` differentiates the analytic first partials with a
    five-point stencil; ``symbolic`` lambdifies the sympy Hessian of L.
    """
    v, p, S, Gm, g = _prepare(phi_t, phi_xi, S0, gamma)
    v, p, S = np.broadcast_arrays(v, p, S)
    if method == "finite-difference":
        coeffs = _fd_hessian(v, p, S, g)
    elif method == "symbolic":
        coeffs = tuple(np.broadcast_to(np.asarray(f(v, p, S), dtype=float), v.shape)
                       for f in _symbolic_hessian(g))
    else:
        raise DomainError(f"unknown Euler-Lagrange oracle {method!r}; expected one of {EL_ORACLES}")
    return tuple(as_output(c) for c in coeffs)


def parallel_deviation(a, b) -> ArrayLike:
    """
    Max-abs difference of two coefficient vectors after normalising each by its
    largest component and aligning signs.  Vectors run along the last axis.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.max(np.abs(a), axis=-1, keepdims=True)
    nb = np.max(np.abs(b), axis=-1, keepdims=True)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DomainError("cannot compare a zero coefficient vector")
    ah = a / na
    bh = b / nb
    sign = np.where(np.sum(ah * bh, axis=-1, keepdims=True) < 0.0, -1.0, 1.0)
    return as_output(np.max(np.abs(ah - sign * bh), axis=-1))
