"""
Run configuration: flat ``key = value`` files.

Lines starting with '#' and blank lines are ignored; keys are dotted lowercase
names (``entropy.q``, ``ic.b``, ``tol.el``).  Unknown keys and unparsable
values raise ConfigError naming the key.  The canonical rendering of the
resolved configuration (output directory and thread count excluded) is
hashed and stamped into every report.
"""

from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple
import hashlib
import logging
import math
import os

from .errors import ConfigError, RelGasError
from .pipeline.initial_conditions import InitialCondition, PRESETS
from .pipeline.solver import SolverConfig
from .tools.core import EL_ORACLES, check_gamma
from .tools.entropy import FAMILIES, EntropyProfile
from .tools.lagrangian_grid import BOUNDARIES, MIN_CELLS, Grid

logger = logging.getLogger(__name__)

UNHASHED_KEYS = ("out", "threads")


def _key(name: str, **meta) -> Dict[str, Any]:
    return {"key": name, **meta}


@dataclass(frozen=True)
class RunConfig:
    gamma: float = field(default=5.0 / 3.0, metadata=_key("gamma"))
    entropy: str = field(default="constant", metadata=_key("entropy"))
    entropy_s0: float = field(default=1.0, metadata=_key("entropy.s0"))
    entropy_q: float = field(default=1.0, metadata=_key("entropy.q"))
    entropy_expr: str = field(default="", metadata=_key("entropy.expr"))
    xi_min: float = field(default=0.0, metadata=_key("xi_min"))
    xi_max: float = field(default=1.0, metadata=_key("xi_max"))
    n: int = field(default=200, metadata=_key("n"))
    boundary: str = field(default="periodic", metadata=_key("boundary"))
    cfl: float = field(default=0.4, metadata=_key("cfl"))
    t_end: float = field(default=1.0, metadata=_key("t_end"))
    stride: int = field(default=1, metadata=_key("stride"))
    velocity_margin: float = field(default=1e-6, metadata=_key("velocity_margin"))
    denominator_guard: float = field(default=1e-12, metadata=_key("denominator_guard"))
    dt_max: Optional[float] = field(default=None, metadata=_key("dt_max"))
    ic: str = field(default="rest", metadata=_key("ic"))
    ic_a: float = field(default=0.0, metadata=_key("ic.a"))
    ic_b: float = field(default=0.0, metadata=_key("ic.b"))
    ic_k: float = field(default=1.0, metadata=_key("ic.k"))
    ic_sigma: float = field(default=0.1, metadata=_key("ic.sigma"))
    ic_xi0: float = field(default=0.5, metadata=_key("ic.xi0"))
    ic_balanced: Optional[bool] = field(default=None, metadata=_key("ic.balanced"))
    check_el: bool = field(default=True, metadata=_key("check.el"))
    check_noether: bool = field(default=True, metadata=_key("check.noether"))
    check_classify: bool = field(default=True, metadata=_key("check.classify"))
    check_diagnostics: bool = field(default=True, metadata=_key("check.diagnostics"))
    check_euler: bool = field(default=True, metadata=_key("check.euler"))
    samples_el: int = field(default=1000, metadata=_key("samples.el"))
    samples_noether: int = field(default=10000, metadata=_key("samples.noether"))
    samples_classify: int = field(default=16, metadata=_key("samples.classify"))
    tol_el: float = field(default=1e-8, metadata=_key("tol.el"))
    tol_noether: float = field(default=1e-10, metadata=_key("tol.noether"))
    tol_classify: float = field(default=1e-8, metadata=_key("tol.classify"))
    tol_order: float = field(default=0.3, metadata=_key("tol.order"))
    el_oracle: str = field(default="finite-difference", metadata=_key("el.oracle"))
    refinements: Tuple[int, ...] = field(default=(), metadata=_key("refinements"))
    euler_nx: int = field(default=0, metadata=_key("euler.nx"))
    laws_printed: bool = field(default=False, metadata=_key("laws.printed"))
    seed: int = field(default=0, metadata=_key("seed"))
    threads: int = field(default=0, metadata=_key("threads"))
    out: str = field(default="out", metadata=_key("out"))

    def __post_init__(self):
        def fail(key: str, message: str):
            raise ConfigError(f"invalid value for '{key}': {message}")

        try:
            check_gamma(self.gamma)
        except RelGasError as exc:
            fail("gamma", str(exc))
        if self.entropy not in FAMILIES:
            fail("entropy", f"{self.entropy!r} is not one of {FAMILIES}")
        if self.entropy == "custom" and not self.entropy_expr.strip():
            fail("entropy.expr", "custom entropy needs an expression in xi")
        if self.boundary not in BOUNDARIES:
            fail("boundary", f"{self.boundary!r} is not one of {BOUNDARIES}")
        if self.ic not in PRESETS:
            fail("ic", f"{self.ic!r} is not one of {PRESETS}")
        if self.el_oracle not in EL_ORACLES:
            fail("el.oracle", f"{self.el_oracle!r} is not one of {EL_ORACLES}")
        if not self.xi_max > self.xi_min:
            fail("xi_max", "must exceed xi_min")
        if self.n < MIN_CELLS:
            fail("n", f"must be >= {MIN_CELLS}")
        for n in self.refinements:
            if n < MIN_CELLS:
                fail("refinements", f"every resolution must be >= {MIN_CELLS}")
        if not 0.0 < self.cfl <= 1.0:
            fail("cfl", "must lie in (0, 1]")
        if not self.t_end > 0.0:
            fail("t_end", "must be positive")
        if self.stride < 1:
            fail("stride", "must be >= 1")
        if self.dt_max is not None and not self.dt_max > 0.0:
            fail("dt_max", "must be positive")
        for key in ("tol.el", "tol.noether", "tol.classify", "tol.order"):
            value = getattr(self, key.replace(".", "_"))
            if not (value >= 0.0 and math.isfinite(value)):
                fail(key, "tolerances must be finite and >= 0")
        for key in ("samples.el", "samples.noether"):
            if getattr(self, key.replace(".", "_")) < 1:
                fail(key, "must be >= 1")
        if self.samples_classify < 8:
            fail("samples.classify", "classification needs at least 8 samples")
        if self.euler_nx < 0 or self.threads < 0:
            fail("euler.nx" if self.euler_nx < 0 else "threads", "must be >= 0")
        try:
            self.profile().check_domain(self.xi_min, self.xi_max)
        except RelGasError as exc:
            fail("entropy", str(exc))

    # ------------------------------------------------------------------ #
    def profile(self) -> EntropyProfile:
        dom = (self.xi_min, self.xi_max)
        if self.entropy == "constant":
            return EntropyProfile.constant(self.entropy_s0, domain=dom)
        if self.entropy == "exponential":
            return EntropyProfile.exponential(self.entropy_q, domain=dom)
        if self.entropy == "power":
            return EntropyProfile.power(self.entropy_q, domain=dom)
        return EntropyProfile.from_expression(self.entropy_expr, domain=dom)

    def grid(self, n: Optional[int] = None) -> Grid:
        return Grid(self.xi_min, self.xi_max, int(n or self.n), self.boundary)

    def solver_config(self, n: Optional[int] = None) -> SolverConfig:
        return SolverConfig(
            gamma=self.gamma,
            profile=self.profile(),
            grid=self.grid(n),
            cfl=self.cfl,
            t_end=self.t_end,
            stride=self.stride,
            velocity_margin=self.velocity_margin,
            denominator_guard=self.denominator_guard,
            dt_max=self.dt_max,
        )

    def initial_condition(self) -> InitialCondition:
        return InitialCondition(self.ic, a=self.ic_a, b=self.ic_b, k=self.ic_k,
                                sigma=self.ic_sigma, xi0=self.ic_xi0, balanced=self.ic_balanced)

    def resolutions(self) -> List[int]:
        if self.refinements:
            return sorted(set(self.refinements))
        return [self.n, 2 * self.n, 4 * self.n]

    def effective_threads(self) -> int:
        if self.threads:
            return self.threads
        desired = os.environ.get("RELGAS_THREADS")
        try:
            return max(1, int(desired)) if desired else min(4, max(1, os.cpu_count() or 2))
        except ValueError:
            return min(4, max(1, os.cpu_count() or 2))

    def with_overrides(self, **changes: Any) -> "RunConfig":
        clean = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **clean) if clean else self

    # ------------------------------------------------------------------ #
    def canonical_text(self) -> str:
        lines = []
        for f in fields(self):
            key = f.metadata["key"]
            if key in UNHASHED_KEYS:
                continue
            lines.append(f"{key} = {_render(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> Dict[str, Any]:
        return {f.metadata["key"]: _jsonable(getattr(self, f.name)) for f in fields(self)}


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def _jsonable(value: Any) -> Any:
    return list(value) if isinstance(value, tuple) else value


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_value(key: str, raw: str, kind: Any) -> Any:
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError(f"expected an integer, got {text!r}")
            return int(value)
        if kind is float:
            return float(text)
        if kind == Optional[float]:
            return None if text.lower() in ("", "none") else float(text)
        if kind == Optional[bool]:
            return None if text.lower() in ("", "none", "auto") else _parse_value(key, text, bool)
        if kind == Tuple[int, ...]:
            parts = [p for p in text.replace(",", " ").split() if p]
            return tuple(int(p) for p in parts)
        return text
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}': {exc}") from exc


_KEYS = {f.metadata["key"]: f for f in fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown configuration key '{key}'")
        f = _KEYS[key]
        values[f.name] = _parse_value(key, raw, f.type)
    return RunConfig(**values)


def load_config(path: Optional[str]) -> RunConfig:
    if not path:
        logger.info("No config file given; using defaults")
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    config = parse_config_text(text, source=path)
    logger.info(f"Loaded config {path} (hash {config.config_hash})")
    return config
