"""
Entropy profiles S0(xi) along particle labels.

Families:
    constant      S0 = s0
    exponential   S0 = exp(q xi)
    power         S0 = xi^q
    custom        user evaluators (S0, S0', S0'', S0''') or a sympy expression in ``xi``

Every profile carries an amplitude A, a stretch lam and an offset o, so that the
value actually evaluated is A * base((xi - o) / lam).  The equivalence maps
(translation of xi, dilations, scaling of S) act on these three numbers only.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..errors import ProfileError
from .core import ArrayLike, as_output

logger = logging.getLogger(__name__)

FAMILIES = ("constant", "exponential", "power", "custom")

Evaluators = Tuple[Callable[[np.ndarray], Any], ...]


@lru_cache(maxsize=64)
def _expression_evaluators(expr: str) -> Evaluators:
    import sympy as sp

    xi = sp.Symbol("xi", real=True)
    try:
        base = sp.sympify(expr, locals={"xi": xi})
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ProfileError(f"cannot parse entropy expression {expr!r}: {exc}") from exc
    extra = base.free_symbols - {xi}
    if extra:
        names = ", ".join(sorted(str(s) for s in extra))
        raise ProfileError(f"entropy expression {expr!r} has unknown symbols: {names}")
    derivs = [base]
    for _ in range(3):
        derivs.append(sp.diff(derivs[-1], xi))
    return tuple(sp.lambdify(xi, d, modules="numpy") for d in derivs)


@dataclass(frozen=True)
class EntropyProfile:
    family: str
    s0: float = 1.0
    q: float = 0.0
    amplitude: float = 1.0
    stretch: float = 1.0
    offset: float = 0.0
    expr: str = ""
    evaluators: Optional[Evaluators] = field(default=None, compare=False, repr=False)
    domain: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ProfileError(f"unknown entropy family {self.family!r}; expected one of {FAMILIES}")
        if not (self.amplitude > 0.0 and math.isfinite(self.amplitude)):
            raise ProfileError(f"entropy amplitude must be positive, got {self.amplitude!r}")
        if not (self.stretch > 0.0 and math.isfinite(self.stretch)):
            raise ProfileError(f"entropy stretch must be positive, got {self.stretch!r}")
        if self.family == "constant" and not (self.s0 >= 0.0 and math.isfinite(self.s0)):
            raise ProfileError(f"constant entropy must be >= 0, got {self.s0!r}")
        if self.family in ("exponential", "power") and not (self.q != 0.0 and math.isfinite(self.q)):
            raise ProfileError(f"{self.family} entropy needs a finite q != 0, got {self.q!r}")
        if self.family == "custom":
            if self.evaluators is None and not self.expr:
                raise ProfileError("custom entropy needs evaluators or an expression")
            if self.evaluators is not None and len(self.evaluators) != 4:
                raise ProfileError("custom entropy needs four evaluators (S0, S0', S0'', S0''')")
            if self.evaluators is None:
                _expression_evaluators(self.expr)
            else:
                lo, hi = self.sample_domain()
                self.validate_derivatives(np.linspace(lo, hi, 9)[1:-1])

    # ------------------------------------------------------------------ #
    @classmethod
    def constant(cls, s0: float = 1.0, **kw) -> "EntropyProfile":
        return cls("constant", s0=float(s0), **kw)

    @classmethod
    def exponential(cls, q: float, **kw) -> "EntropyProfile":
        return cls("exponential", q=float(q), **kw)

    @classmethod
    def power(cls, q: float, **kw) -> "EntropyProfile":
        return cls("power", q=float(q), **kw)

    @classmethod
    def custom(cls, evaluators: Sequence[Callable], **kw) -> "EntropyProfile":
        return cls("custom", evaluators=tuple(evaluators), **kw)

    @classmethod
    def from_expression(cls, expr: str, **kw) -> "EntropyProfile":
        return cls("custom", expr=str(expr), **kw)

    # ------------------------------------------------------------------ #
    @property
    def is_constant(self) -> bool:
        return self.family == "constant"

    @property
    def effective_q(self) -> Optional[float]:
        """Exponent seen in xi: q/lam for exponential, q for power."""
        if self.family == "exponential":
            return self.q / self.stretch
        if self.family == "power":
            return self.q
        return None

    def _base(self, s: np.ndarray) -> Tuple[np.ndarray, ...]:
        if self.family == "constant":
            val = np.full_like(s, self.s0)
            zero = np.zeros_like(s)
            return val, zero, zero, zero
        if self.family == "exponential":
            q = self.q
            val = np.exp(q * s)
            return val, q * val, q * q * val, q ** 3 * val
        if self.family == "power":
            q = self.q
            val = s ** q
            return val, q * val / s, q * (q - 1.0) * val / s ** 2, q * (q - 1.0) * (q - 2.0) * val / s ** 3
        funcs = self.evaluators if self.evaluators is not None else _expression_evaluators(self.expr)
        return tuple(np.asarray(f(s), dtype=float) + np.zeros_like(s) for f in funcs)

    def derivs(self, xi: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike, ArrayLike]:
        """(S0, S0', S0'', S0''') at xi."""
        xi = np.asarray(xi, dtype=float)
        s = (xi - self.offset) / self.stretch
        base = self._base(s)
        out = tuple(self.amplitude * b / self.stretch ** k for k, b in enumerate(base))
        return tuple(as_output(o) for o in out)

    def value(self, xi: ArrayLike) -> ArrayLike:
        return self.derivs(xi)[0]

    # ------------------------------------------------------------------ #
    def check_domain(self, xi_min: float, xi_max: float, samples: int = 65) -> None:
        """Raise ProfileError unless S0 is positive and finite on [xi_min, xi_max]."""
        if self.family == "power" and not (xi_min - self.offset > 0.0):
            raise ProfileError(
                f"power entropy requires xi > {self.offset!r} on the domain, got xi_min = {xi_min!r}"
            )
        if self.family in ("constant", "exponential"):
            return
        xi = np.linspace(xi_min, xi_max, samples)
        vals = np.asarray(self.value(xi))
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise ProfileError(f"entropy profile is not positive on [{xi_min!r}, {xi_max!r}]")

    def validate_derivatives(self, xi: ArrayLike, rtol: float = 1e-6) -> float:
        """
        Compare derivative evaluators with centred differences of the next lower
        derivative.  Returns the worst relative deviation; raises ProfileError
        when it exceeds rtol.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        h = 1e-4 * np.maximum(1.0, np.abs(xi)) * self.stretch
        lo = self.derivs(xi - h)
        hi = self.derivs(xi + h)
        mid = self.derivs(xi)
        worst = 0.0
        for k in range(1, 4):
            fd = (np.asarray(hi[k - 1]) - np.asarray(lo[k - 1])) / (2.0 * h)
            exact = np.asarray(mid[k])
            scale = max(float(np.max(np.abs(exact))), float(np.max(np.abs(fd))), 1e-300)
            dev = float(np.max(np.abs(fd - exact))) / scale
            worst = max(worst, dev)
            if dev > rtol:
                raise ProfileError(
                    f"derivative {k} of the entropy profile disagrees with finite differences "
                    f"(relative deviation {dev:.3e} > {rtol:.1e})"
                )
        return worst

    # ------------------------------------------------------------------ #
    def rescaled(self, amplitude: float = 1.0, stretch: float = 1.0) -> "EntropyProfile":
        """Profile xi -> amplitude * S0(xi / stretch)."""
        dom = None
        if self.domain is not None:
            dom = (self.domain[0] * stretch, self.domain[1] * stretch)
        return replace(
            self,
            amplitude=self.amplitude * amplitude,
            stretch=self.stretch * stretch,
            offset=self.offset * stretch,
            domain=dom,
        )

    def translated(self, shift: float) -> "EntropyProfile":
        """Profile xi -> S0(xi - shift)."""
        dom = None if self.domain is None else (self.domain[0] + shift, self.domain[1] + shift)
        return replace(self, offset=self.offset + shift, domain=dom)

    def with_domain(self, xi_min: float, xi_max: float) -> "EntropyProfile":
        return replace(self, domain=(float(xi_min), float(xi_max)))

    def sample_domain(self) -> Tuple[float, float]:
        if self.domain is not None:
            return self.domain
        if self.family == "power":
            return (self.offset + 1.0, self.offset + 2.0)
        return (0.0, 1.0)

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"family": self.family}
        if self.family == "constant":
            info["s0"] = self.s0 * self.amplitude
        elif self.family in ("exponential", "power"):
            info["q"] = self.effective_q
        elif self.expr:
            info["expr"] = self.expr
        if self.amplitude != 1.0:
            info["amplitude"] = self.amplitude
        if self.stretch != 1.0:
            info["stretch"] = self.stretch
        if self.offset != 0.0:
            info["offset"] = self.offset
        return info

    def label(self) -> str:
        if self.family == "constant":
            return f"constant({self.s0 * self.amplitude:g})"
        if self.family in ("exponential", "power"):
            return f"{self.family}({self.effective_q:g})"
        return f"custom({self.expr})" if self.expr else "custom"
