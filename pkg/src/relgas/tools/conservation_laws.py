"""
Conservation laws of the Lagrangian gas equation and their discrete diagnostics
-------------------------------------------------------------------------------
Every law is a pair (T^t, T^xi) with D_t T^t + D_xi T^xi = 0 on solutions.

Built-in laws (v = phi_t, p = phi_xi, Gamma = sqrt(1 - v^2), G = pressure factor):
    T1  momentum            (v G/Gamma,  Gamma^g S0 p^-g)
    T2  energy              (G/Gamma - S0 Gamma^g p^(1-g),  S0 Gamma^g v p^-g)
    T3  boost / centre      (phi T2^t - t T1^t,  S0 Gamma^g (phi v - t) p^-g)
    T5  label translation   (p v G/Gamma,  Gamma G)              constant entropy
    T4  dilation            (t (S0 Gamma^g p^(1-g) - G/Gamma) + (phi + xi p) v G/Gamma,
                             xi Gamma G + S0 Gamma^g p^-g (phi - t v))
                                                                 S0 ~ xi^q, q = 2(1-g)

``form="printed"`` swaps in the tabulated time density of T3,
    phi Gamma^-1 (1 - S0 p^(1-g) Gamma^(g-2)) - t v G,
which is kept for reporting only: it does not satisfy the divergence identity.

Diagnostics report schema (DiagnosticsReport.to_dict):
    {
        "times": [...],
        "laws": {"T2": {"charge": [...], "balance_residual": [...],
                        "max_div_residual": [...], "relative_drift": 1.2e-9,
                        "max_balance": 3.1e-7, "max_div": 4.0e-6,
                        "flux_flip_suggested": false}}
    }
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.integrate import trapezoid

from ..errors import NotApplicable
from .core import ArrayLike, Jet1, as_output, kinematic_terms
from .entropy import EntropyProfile
from .lagrangian_grid import Grid, SimState, Trajectory, node_jets

logger = logging.getLogger(__name__)

DensityFn = Callable[[Jet1, ArrayLike, float], Tuple[ArrayLike, ArrayLike]]
LAW_ORDER = ("T1", "T2", "T3", "T5", "T4")
FORMS = ("derived", "printed")


def _always(profile: EntropyProfile, gamma: float) -> bool:
    return True


def _constant_only(profile: EntropyProfile, gamma: float) -> bool:
    return profile.family == "constant"


def dilation_exponent(gamma: float) -> float:
    """Power-law exponent q = 2(1 - gamma) for which the dilation is variational."""
    return 2.0 * (1.0 - gamma)


def _dilation_power(profile: EntropyProfile, gamma: float) -> bool:
    return profile.family == "power" and math.isclose(
        profile.q, dilation_exponent(gamma), rel_tol=1e-12, abs_tol=1e-12
    )


@dataclass(frozen=True)
class ConservationLaw:
    name: str
    density: DensityFn = field(repr=False)
    applies: Callable[[EntropyProfile, float], bool] = field(default=_always, repr=False)
    generator: Optional[str] = None
    # noether_density(generator) == noether_factor * density
    noether_factor: Optional[float] = None
    explicit_time: bool = False
    form: str = "derived"
    warning: Optional[str] = None

    def evaluate(self, jet: Jet1, S0: ArrayLike, gamma: float) -> Tuple[ArrayLike, ArrayLike]:
        Tt, Tx = self.density(jet, S0, gamma)
        Tt, Tx = np.broadcast_arrays(np.asarray(Tt, dtype=float), np.asarray(Tx, dtype=float))
        return as_output(Tt), as_output(Tx)


# ----------------------------- densities ----------------------------- #

def _t1(jet, S0, gamma):
    v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
    return v * G / Gm, Gm ** gamma * S * p ** (-gamma)


def _t2(jet, S0, gamma):
    v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
    return G / Gm - S * Gm ** gamma * p ** (1.0 - gamma), S * Gm ** gamma * v * p ** (-gamma)


def _t3_flux(jet, S, v, p, Gm, gamma):
    phi = np.asarray(jet.phi, dtype=float)
    t = np.asarray(jet.t, dtype=float)
    return S * Gm ** gamma * (phi * v - t) * p ** (-gamma)


def _t3(jet, S0, gamma):
    v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
    phi = np.asarray(jet.phi, dtype=float)
    t = np.asarray(jet.t, dtype=float)
    t2 = G / Gm - S * Gm ** gamma * p ** (1.0 - gamma)
    t1 = v * G / Gm
    return phi * t2 - t * t1, _t3_flux(jet, S, v, p, Gm, gamma)


def _t3_printed(jet, S0, gamma):
    v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
    phi = np.asarray(jet.phi, dtype=float)
    t = np.asarray(jet.t, dtype=float)
    Tt = phi / Gm * (1.0 - S * p ** (1.0 - gamma) * Gm ** (gamma - 2.0)) - t * v * G
    return Tt, _t3_flux(jet, S, v, p, Gm, gamma)


def _t5(jet, S0, gamma):
    v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
    return p * v * G / Gm, Gm * G


def _t4_factory(offset: float) -> DensityFn:
    def _t4(jet, S0, gamma):
        v, p, S, Gm, G = kinematic_terms(jet.phi_t, jet.phi_xi, S0, gamma)
        phi = np.asarray(jet.phi, dtype=float)
        t = np.asarray(jet.t, dtype=float)
        xi = np.asarray(jet.xi, dtype=float) - offset
        Tt = t * (S * Gm ** gamma * p ** (1.0 - gamma) - G / Gm) + (phi + xi * p) * v * G / Gm
        Tx = xi * Gm * G + S * Gm ** gamma * p ** (-gamma) * (phi - t * v)
        return Tt, Tx
    return _t4


def builtin_laws(profile: EntropyProfile, gamma: float, form: str = "derived") -> List[ConservationLaw]:
    """Laws admitted by the profile, in the order T1, T2, T3, T5, T4."""
    if form not in FORMS:
        raise ValueError(f"unknown density form {form!r}; expected one of {FORMS}")
    laws = [
        ConservationLaw("T1", _t1, generator="X1", noether_factor=-1.0),
        ConservationLaw("T2", _t2, generator="X2", noether_factor=1.0),
        ConservationLaw("T3", _t3, generator="X3", noether_factor=1.0, explicit_time=True)
        if form == "derived" else
        ConservationLaw("T3", _t3_printed, generator="X3", explicit_time=True, form="printed",
                        warning="tabulated time density; not a conserved density"),
        ConservationLaw("T5", _t5, applies=_constant_only, generator="X5", noether_factor=1.0),
        ConservationLaw("T4", _t4_factory(profile.offset), applies=_dilation_power,
                        generator="X4b", noether_factor=gamma - 1.0, explicit_time=True),
    ]
    return [law for law in laws if law.applies(profile, gamma)]


def law_by_name(name: str, profile: EntropyProfile, gamma: float, form: str = "derived") -> ConservationLaw:
    for law in builtin_laws(profile, gamma, form):
        if law.name == name:
            return law
    raise NotApplicable(f"law {name} does not hold for {profile.label()} at gamma={gamma!r}")


def eval_density(law: ConservationLaw, jet: Jet1, profile: EntropyProfile,
                 gamma: float) -> Tuple[ArrayLike, ArrayLike]:
    if not law.applies(profile, gamma):
        raise NotApplicable(f"law {law.name} does not hold for {profile.label()} at gamma={gamma!r}")
    return law.evaluate(jet, profile.value(jet.xi), gamma)


# ----------------------------- diagnostics ----------------------------- #

def _state_densities(law, state, grid, profile, gamma, extend):
    jets = node_jets(state, grid, extend=extend)
    Tt, Tx = eval_density(law, jets, profile, gamma)
    return jets, np.asarray(Tt), np.asarray(Tx)


def global_charge(law: ConservationLaw, state: SimState, grid: Grid,
                  profile: EntropyProfile, gamma: float) -> float:
    """Trapezoid charge over the full period (periodic) or between the walls."""
    jets, Tt, _ = _state_densities(law, state, grid, profile, gamma, "closure")
    return float(trapezoid(Tt, jets.xi))


def _charges(law, trajectory, profile, gamma):
    grid = trajectory.grid
    Q = np.empty(len(trajectory.snapshots))
    flux = np.empty(len(trajectory.snapshots))
    scale = 0.0
    for k, state in enumerate(trajectory.snapshots):
        jets, Tt, Tx = _state_densities(law, state, grid, profile, gamma, "closure")
        Q[k] = trapezoid(Tt, jets.xi)
        flux[k] = Tx[-1] - Tx[0]
        if k == 0:
            scale = float(trapezoid(np.abs(Tt), jets.xi))
    return Q, flux, scale


def balance_residual(law: ConservationLaw, trajectory: Trajectory, grid: Grid,
                     profile: EntropyProfile, gamma: float) -> np.ndarray:
    """
    b(t_k) = dQ/dt + T^xi(right) - T^xi(left).  dQ/dt is centred in time and
    one-sided second order at the first and last snapshot.
    """
    trajectory.require(3)
    Q, flux, _ = _charges(law, trajectory, profile, gamma)
    return np.gradient(Q, trajectory.snapshot_dt, edge_order=2) + flux


def divergence_residual(law: ConservationLaw, trajectory: Trajectory, profile: EntropyProfile,
                        gamma: float) -> np.ndarray:
    """
    r = delta_t T^t + delta_xi T^xi on the interior nodes (all nodes when periodic),
    one row per snapshot.  Rows 0 and -1 use one-sided time differences.
    """
    trajectory.require(3)
    grid = trajectory.grid
    Tt_rows, Tx_rows = [], []
    for state in trajectory.snapshots:
        _, Tt, Tx = _state_densities(law, state, grid, profile, gamma, "ghost")
        Tt_rows.append(Tt)
        Tx_rows.append(Tx)
    Tt = np.array(Tt_rows)
    Tx = np.array(Tx_rows)
    dTt = np.gradient(Tt, trajectory.snapshot_dt, axis=0, edge_order=2)
    dTx = (Tx[:, 2:] - Tx[:, :-2]) / (2.0 * grid.dxi)
    return dTt[:, 1:-1] + dTx


def interior_max(series: np.ndarray) -> float:
    """Max |.| over snapshots excluding the first and last."""
    arr = np.abs(np.asarray(series))
    if arr.ndim > 1:
        arr = arr.reshape(arr.shape[0], -1).max(axis=1)
    if arr.shape[0] < 3:
        return float("nan")
    return float(arr[1:-1].max())


def charge_drift(charges: Sequence[float], scale: float = 0.0) -> float:
    """max_k |Q_k - Q_0| / max(|Q_0|, scale)."""
    Q = np.asarray(charges, dtype=float)
    denom = max(abs(Q[0]), scale)
    if denom == 0.0:
        return 0.0 if np.all(Q == Q[0]) else float("inf")
    return float(np.max(np.abs(Q - Q[0])) / denom)


def convergence_order(spacings: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(spacing)."""
    h = np.asarray(spacings, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.size < 2 or np.any(~np.isfinite(e)) or np.any(e <= 0.0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


@dataclass
class LawDiagnostics:
    name: str
    charge: np.ndarray
    balance: Optional[np.ndarray]
    max_div: Optional[np.ndarray]
    relative_drift: float
    flux_flip_suggested: bool = False

    @property
    def max_balance(self) -> float:
        return interior_max(self.balance) if self.balance is not None else float("nan")

    @property
    def max_div_residual(self) -> float:
        return interior_max(self.max_div) if self.max_div is not None else float("nan")


@dataclass
class DiagnosticsReport:
    times: np.ndarray
    laws: Dict[str, LawDiagnostics]
    config_hash: str = ""
    orders: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, str, float, Optional[float], Optional[float]]]:
        """(t, law, charge, balance_residual, max_div_residual) per snapshot and law."""
        out = []
        for k, t in enumerate(self.times):
            for name, diag in self.laws.items():
                b = None if diag.balance is None else float(diag.balance[k])
                r = None if diag.max_div is None else float(diag.max_div[k])
                out.append((float(t), name, float(diag.charge[k]), b, r))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "times": [float(t) for t in self.times],
            "laws": {
                name: {
                    "charge": [float(q) for q in d.charge],
                    "balance_residual": None if d.balance is None else [float(b) for b in d.balance],
                    "max_div_residual": None if d.max_div is None else [float(r) for r in d.max_div],
                    "relative_drift": d.relative_drift,
                    "max_balance": d.max_balance,
                    "max_div": d.max_div_residual,
                    "flux_flip_suggested": d.flux_flip_suggested,
                }
                for name, d in self.laws.items()
            },
            "orders": self.orders,
        }


def _diagnose_law(law, trajectory, profile, gamma) -> LawDiagnostics:
    Q, flux, scale = _charges(law, trajectory, profile, gamma)
    drift = charge_drift(Q, scale)
    if len(trajectory.snapshots) < 3:
        return LawDiagnostics(law.name, Q, None, None, drift)
    dQ = np.gradient(Q, trajectory.snapshot_dt, edge_order=2)
    balance = dQ + flux
    flipped = dQ - flux
    r = divergence_residual(law, trajectory, profile, gamma)
    max_div = np.abs(r).max(axis=1)
    flip = bool(interior_max(flipped) < 0.5 * interior_max(balance))
    if flip:
        logger.warning(f"{law.name}: balance closes better with the flux sign reversed (reported only)")
    return LawDiagnostics(law.name, Q, balance, max_div, drift, flip)


def diagnose(trajectory: Trajectory, profile: EntropyProfile, gamma: float,
             laws: Optional[List[ConservationLaw]] = None, threads: int = 1) -> DiagnosticsReport:
    """Charges, balance and divergence residuals for every law, one worker per law."""
    laws = builtin_laws(profile, gamma) if laws is None else laws
    if len(trajectory.snapshots) < 3:
        logger.warning("fewer than 3 snapshots: residual columns left empty")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = list(executor.map(lambda law: _diagnose_law(law, trajectory, profile, gamma), laws))
    return DiagnosticsReport(
        times=trajectory.times,
        laws={d.name: d for d in results},
        config_hash=trajectory.config_hash,
    )
