"""
Point symmetries of the Lagrangian gas equation and their Noether currents.

Generators are affine in (xi, t, phi):
    zeta^xi = a0 + a1 xi
    zeta^t  = b0 + b1 t + b2 phi
    eta^phi = c0 + c1 t + c2 phi

The kernel (any entropy) is X1 = d_phi, X2 = d_t, X3 = phi d_t + t d_phi.
Extensions: constant entropy adds X4 (uniform dilation) and X5 = d_xi;
S0 = exp(q xi) adds X4a; S0 = xi^q adds X4b.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..errors import DomainError, InsufficientSamples
from .conservation_laws import ConservationLaw, dilation_exponent
from .core import ArrayLike, Jet1, Jet2, as_output, check_gamma, lagrangian_density, lagrangian_partials
from .entropy import EntropyProfile

logger = logging.getLogger(__name__)

MIN_CLASSIFY_SAMPLES = 8
COEFFICIENTS = ("a0", "a1", "b0", "b1", "b2", "c0", "c1", "c2")


@dataclass(frozen=True)
class AffineGenerator:
    name: str
    a0: float = 0.0
    a1: float = 0.0
    b0: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if all(getattr(self, c) == 0.0 for c in COEFFICIENTS):
            raise DomainError(f"generator {self.name!r} has all coefficients zero")

    def zeta_xi(self, xi: ArrayLike) -> ArrayLike:
        return self.a0 + self.a1 * np.asarray(xi, dtype=float)

    def zeta_t(self, t: ArrayLike, phi: ArrayLike) -> ArrayLike:
        return self.b0 + self.b1 * np.asarray(t, dtype=float) + self.b2 * np.asarray(phi, dtype=float)

    def eta(self, t: ArrayLike, phi: ArrayLike) -> ArrayLike:
        return self.c0 + self.c1 * np.asarray(t, dtype=float) + self.c2 * np.asarray(phi, dtype=float)

    def coefficients(self) -> Dict[str, float]:
        return {c: getattr(self, c) for c in COEFFICIENTS}

    def scaled(self, factor: float, name: Optional[str] = None) -> "AffineGenerator":
        return AffineGenerator(name or self.name, **{c: factor * v for c, v in self.coefficients().items()})


def x1() -> AffineGenerator:
    return AffineGenerator("X1", c0=1.0)


def x2() -> AffineGenerator:
    return AffineGenerator("X2", b0=1.0)


def x3() -> AffineGenerator:
    return AffineGenerator("X3", b2=1.0, c1=1.0)


def x4() -> AffineGenerator:
    return AffineGenerator("X4", a1=1.0, b1=1.0, c2=1.0)


def x5() -> AffineGenerator:
    return AffineGenerator("X5", a0=1.0)


def x4a(q: float, gamma: float) -> AffineGenerator:
    return AffineGenerator("X4a", a0=gamma - 1.0, b1=q, c2=q)


def x4b(q: float, gamma: float, offset: float = 0.0) -> AffineGenerator:
    """Dilation about xi = offset for S0 ~ (xi - offset)^q."""
    return AffineGenerator("X4b", a0=-(gamma - 1.0) * offset, a1=gamma - 1.0,
                           b1=gamma + q - 1.0, c2=gamma + q - 1.0)


def kernel_generators() -> List[AffineGenerator]:
    return [x1(), x2(), x3()]


def _extension_for_family(family: str, q: Optional[float], offset: float,
                          gamma: float) -> List[AffineGenerator]:
    if family == "constant":
        return [x4(), x5()]
    if family == "exponential":
        return [x4a(q, gamma)]
    if family == "power":
        return [x4b(q, gamma, offset)]
    return []


def extension_for(profile: EntropyProfile, gamma: float) -> List[AffineGenerator]:
    """Generators extending the kernel for this entropy profile."""
    check_gamma(gamma)
    if profile.family == "custom":
        lo, hi = profile.sample_domain()
        result = classify_entropy(profile, np.linspace(lo, hi, 16), gamma=gamma)
        return result.extension
    return _extension_for_family(profile.family, profile.effective_q, profile.offset, gamma)


# ------------------------------ prolongation ------------------------------ #

def prolong1(gen: AffineGenerator, jet: Jet1) -> Tuple[ArrayLike, ArrayLike]:
    """First prolongation coefficients (eta^(t), eta^(xi))."""
    v = np.asarray(jet.phi_t, dtype=float)
    p = np.asarray(jet.phi_xi, dtype=float)
    eta_t = gen.c1 + gen.c2 * v - v * (gen.b1 + gen.b2 * v)
    eta_xi = gen.c2 * p - v * gen.b2 * p - p * gen.a1
    eta_t, eta_xi = np.broadcast_arrays(eta_t, eta_xi)
    return as_output(eta_t), as_output(eta_xi)


def noether_residual(gen: AffineGenerator, jet: Jet1, profile: EntropyProfile, gamma: float) -> ArrayLike:
    """
    R = X L + L (D_t zeta^t + D_xi zeta^xi), with gauge terms set to zero.
    Vanishes identically exactly when the generator is variational.
    """
    S0, S0p, _, _ = profile.derivs(jet.xi)
    L = np.asarray(lagrangian_density(jet, S0, gamma))
    L_v, L_p, L_S = (np.asarray(x) for x in lagrangian_partials(jet.phi_t, jet.phi_xi, S0, gamma))
    eta_t, eta_xi = prolong1(gen, jet)
    v = np.asarray(jet.phi_t, dtype=float)
    div = gen.b1 + gen.b2 * v + gen.a1
    R = gen.zeta_xi(jet.xi) * np.asarray(S0p) * L_S + eta_t * L_v + eta_xi * L_p + L * div
    return as_output(R)


def relative_noether_residual(gen: AffineGenerator, jet: Jet1, profile: EntropyProfile,
                              gamma: float) -> ArrayLike:
    """|R| / L (L > 0 on admissible jets)."""
    S0 = profile.value(jet.xi)
    L = np.asarray(lagrangian_density(jet, S0, gamma))
    return as_output(np.abs(np.asarray(noether_residual(gen, jet, profile, gamma))) / L)


def noether_density(gen: AffineGenerator, gamma: float, profile: Optional[EntropyProfile] = None,
                    validation_jets: int = 256, tol: float = 1e-10, seed: int = 0) -> ConservationLaw:
    """
    Noether current with zero gauge terms:
        T^t  = zeta^t L  + (eta - zeta^t phi_t - zeta^xi phi_xi) L_{phi_t}
        T^xi = zeta^xi L + (eta - zeta^t phi_t - zeta^xi phi_xi) L_{phi_xi}
    When a profile is given the generator is first checked on random jets and a
    warning is attached if it is not variational.
    """
    check_gamma(gamma)
    warning = None
    if profile is not None:
        jets = sample_jets(np.random.default_rng(seed), validation_jets, profile)
        worst = float(np.max(relative_noether_residual(gen, jets, profile, gamma)))
        if worst > tol:
            warning = f"{gen.name} is not variational for {profile.label()} (max |R|/L = {worst:.3e})"
            logger.warning(warning)

    def density(jet: Jet1, S0: ArrayLike, g: float):
        L = np.asarray(lagrangian_density(jet, S0, g))
        L_v, L_p, _ = (np.asarray(x) for x in lagrangian_partials(jet.phi_t, jet.phi_xi, S0, g))
        zt = gen.zeta_t(jet.t, jet.phi)
        zx = gen.zeta_xi(jet.xi)
        Q = gen.eta(jet.t, jet.phi) - zt * np.asarray(jet.phi_t) - zx * np.asarray(jet.phi_xi)
        return zt * L + Q * L_v, zx * L + Q * L_p

    explicit = gen.b1 != 0.0 or gen.c1 != 0.0
    return ConservationLaw(f"N[{gen.name}]", density, generator=gen.name, noether_factor=1.0,
                           explicit_time=explicit, form="noether", warning=warning)


def expected_variational(gen: AffineGenerator, profile: EntropyProfile, gamma: float,
                         family: Optional[str] = None) -> bool:
    """Verdict the classification predicts for a tabulated generator ("family" overrides the tag)."""
    if gen.name in ("X1", "X2", "X3"):
        return True
    if gen.name == "X5":
        return (family or profile.family) == "constant"
    if gen.name == "X4b":
        q = gen.b1 - gamma + 1.0
        return math.isclose(q, dilation_exponent(gamma), rel_tol=1e-12, abs_tol=1e-12)
    return False


# ------------------------------ sampling ------------------------------ #

def sample_jets(rng: np.random.Generator, count: int, profile: EntropyProfile,
                max_speed: float = 0.9, stretch_range: Tuple[float, float] = (0.2, 5.0)) -> Jet1:
    """Random admissible first-order jets with xi inside the profile's sample domain."""
    lo, hi = profile.sample_domain()
    xi = rng.uniform(lo, hi, count)
    t = rng.uniform(-1.0, 1.0, count)
    phi = xi + rng.uniform(-1.0, 1.0, count)
    v = rng.uniform(-max_speed, max_speed, count)
    p = np.exp(rng.uniform(math.log(stretch_range[0]), math.log(stretch_range[1]), count))
    return Jet1(xi=xi, t=t, phi=phi, phi_t=v, phi_xi=p)


# ------------------------------ classification ------------------------------ #

def delta_invariant(S0: ArrayLike, S0p: ArrayLike, S0pp: ArrayLike, S0ppp: ArrayLike) -> ArrayLike:
    """Delta = -S0 S0' S0''' + 2 S0 S0''^2 - S0'' S0'^2; zero iff the kernel can extend."""
    S0, S0p, S0pp, S0ppp = (np.asarray(x, dtype=float) for x in (S0, S0p, S0pp, S0ppp))
    return as_output(-S0 * S0p * S0ppp + 2.0 * S0 * S0pp ** 2 - S0pp * S0p ** 2)


def scaled_delta(S0, S0p, S0pp, S0ppp) -> np.ndarray:
    """Delta divided by the sum of its term magnitudes (0 where all terms vanish)."""
    S0, S0p, S0pp, S0ppp = (np.asarray(x, dtype=float) for x in (S0, S0p, S0pp, S0ppp))
    mag = np.abs(S0 * S0p * S0ppp) + 2.0 * np.abs(S0 * S0pp ** 2) + np.abs(S0pp * S0p ** 2)
    delta = np.asarray(delta_invariant(S0, S0p, S0pp, S0ppp))
    safe = np.where(mag > 0.0, mag, 1.0)
    return np.where(mag > 0.0, np.abs(delta) / safe, 0.0)


@dataclass
class ClassificationResult:
    family: str
    q: Optional[float] = None
    offset: float = 0.0
    kernel: List[AffineGenerator] = field(default_factory=kernel_generators)
    extension: List[AffineGenerator] = field(default_factory=list)
    delta_samples: List[float] = field(default_factory=list)
    max_scaled_delta: float = 0.0
    fit_deviation: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "q": self.q,
            "offset": self.offset,
            "kernel": [g.name for g in self.kernel],
            "extension": [{"name": g.name, **g.coefficients()} for g in self.extension],
            "delta_samples": [float(d) for d in self.delta_samples],
            "max_scaled_delta": self.max_scaled_delta,
            "fit_deviation": self.fit_deviation,
        }


def classify_entropy(profile: EntropyProfile, samples: Sequence[float], tol: float = 1e-8,
                     gamma: float = 5.0 / 3.0) -> ClassificationResult:
    """
    Decide constant / exponential(q) / power(q) / generic from sampled derivatives.

    constant     |S0'/S0| <= tol everywhere
    exponential  Delta ~ 0 and S0'/S0 constant
    power        Delta ~ 0 and xi S0'/S0 constant, or S0/S0' linear in xi
                 (power law about a shifted origin)
    generic      otherwise, no extension
    """
    check_gamma(gamma)
    xi = np.asarray(samples, dtype=float).ravel()
    if xi.size < MIN_CLASSIFY_SAMPLES:
        raise InsufficientSamples(
            f"classification needs at least {MIN_CLASSIFY_SAMPLES} samples, got {xi.size}"
        )
    if not tol >= 0.0:
        raise DomainError(f"classification tolerance must be >= 0, got {tol!r}")
    S, S1, S2, S3 = (np.asarray(d, dtype=float) for d in profile.derivs(xi))
    if not np.all(np.isfinite(S)) or np.any(S <= 0.0) and not np.all(S == 0.0):
        raise DomainError(f"entropy profile {profile.label()} is not positive at the samples")

    delta = np.asarray(delta_invariant(S, S1, S2, S3))
    sdelta = scaled_delta(S, S1, S2, S3)
    result = ClassificationResult("generic", delta_samples=list(delta),
                                  max_scaled_delta=float(sdelta.max()))

    safe_S = np.where(S == 0.0, 1.0, S)
    r = np.where(S == 0.0, 0.0, S1 / safe_S)
    if float(np.max(np.abs(r))) <= tol:
        result.family = "constant"
        result.fit_deviation = float(np.max(np.abs(r)))
        result.extension = _extension_for_family("constant", None, 0.0, gamma)
        return result
    if result.max_scaled_delta > tol:
        return result

    q_exp = float(np.mean(r))
    dev_exp = float(np.max(np.abs(r - q_exp)))
    if dev_exp <= tol * max(1.0, abs(q_exp)):
        result.family, result.q, result.fit_deviation = "exponential", q_exp, dev_exp
        result.extension = _extension_for_family("exponential", q_exp, 0.0, gamma)
        return result

    s = xi * r
    q_pow = float(np.mean(s))
    dev_pow = float(np.max(np.abs(s - q_pow)))
    if dev_pow <= tol * max(1.0, abs(q_pow)):
        result.family, result.q, result.fit_deviation = "power", q_pow, dev_pow
        result.extension = _extension_for_family("power", q_pow, 0.0, gamma)
        return result

    # S0/S0' = (xi - xi*)/q for a power law about xi*
    if np.all(S1 != 0.0):
        y = S / S1
        slope, intercept = np.polyfit(xi, y, 1)
        dev = float(np.max(np.abs(y - (slope * xi + intercept))))
        if slope != 0.0 and dev <= tol * max(1.0, float(np.max(np.abs(y)))):
            q = 1.0 / slope
            shift = -intercept / slope
            result.family, result.q, result.offset, result.fit_deviation = "power", q, shift, dev
            result.extension = _extension_for_family("power", q, shift, gamma)
            return result
    logger.info(f"Delta vanishes for {profile.label()} but no exponential or power fit within tol")
    return result


def determining_residuals(gen: AffineGenerator, profile: EntropyProfile, gamma: float,
                          xi: ArrayLike) -> Dict[str, Any]:
    """
    Residuals of the determining relations for an affine generator:
        zeta^t = k4 t + k3 phi + k2,  eta = k3 t + k4 phi + k1
        zeta^xi' = -zeta^xi S0' / (S0 (gamma - 1)) + k4
        zeta^xi (S0'' S0 (gamma - 1) - gamma S0'^2) + S0' S0 (gamma - 1) k4 = 0
    """
    check_gamma(gamma)
    S, S1, S2, _ = (np.asarray(d, dtype=float) for d in profile.derivs(xi))
    k4 = gen.b1
    zx = np.asarray(gen.zeta_xi(xi), dtype=float)
    ode = gen.a1 + zx * S1 / (S * (gamma - 1.0)) - k4
    classifying = zx * (S2 * S * (gamma - 1.0) - gamma * S1 ** 2) + S1 * S * (gamma - 1.0) * k4
    scale = np.abs(zx * S2 * S * (gamma - 1.0)) + np.abs(gamma * zx * S1 ** 2) \
        + np.abs(S1 * S * (gamma - 1.0) * k4)
    structure = abs(gen.b1 - gen.c2) + abs(gen.b2 - gen.c1)
    max_ode = float(np.max(np.abs(ode)))
    max_cls = float(np.max(np.abs(classifying) / np.where(scale > 0.0, scale, 1.0)))
    return {
        "generator": gen.name,
        "structure": structure,
        "zeta_xi_ode": max_ode,
        "classifying": max_cls,
        "admitted": structure == 0.0 and max_ode <= 1e-10 * max(1.0, abs(k4)) and max_cls <= 1e-10,
    }


# ------------------------------ equivalence maps ------------------------------ #

def translate_jet(jet: Jet1, a: float) -> Jet1:
    """xi -> xi + a; acts on profiles through EntropyProfile.translated(a)."""
    return replace(jet, xi=np.asarray(jet.xi, dtype=float) + a)


def dilate_jet(jet: Jet2, a: float) -> Jet2:
    """
    Uniform dilation (xi, t, phi) -> e^a (xi, t, phi).  First derivatives are
    unchanged, second derivatives scale by e^-a.  The entropy profile maps to
    profile.rescaled(stretch=e^a) and the main-equation residual by e^-a.
    """
    s = math.exp(a)
    return Jet2(
        xi=s * np.asarray(jet.xi, dtype=float),
        t=s * np.asarray(jet.t, dtype=float),
        phi=s * np.asarray(jet.phi, dtype=float),
        phi_t=jet.phi_t,
        phi_xi=jet.phi_xi,
        phi_tt=np.asarray(jet.phi_tt, dtype=float) / s,
        phi_txi=np.asarray(jet.phi_txi, dtype=float) / s,
        phi_xixi=np.asarray(jet.phi_xixi, dtype=float) / s,
    )


def entropy_scaling(profile: EntropyProfile, a: float, gamma: float) -> EntropyProfile:
    """S -> e^a S together with xi -> xi e^(a/(gamma-1))."""
    check_gamma(gamma)
    return profile.rescaled(amplitude=math.exp(a), stretch=math.exp(a / (gamma - 1.0)))


def entropy_amplitude(profile: EntropyProfile, a: float) -> EntropyProfile:
    """S -> e^a S at fixed xi (entropy scaling composed with the inverse dilation)."""
    return profile.rescaled(amplitude=math.exp(a))
