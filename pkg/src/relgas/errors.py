"""
Typed errors raised by the relgas library.

Pointwise and solver errors may carry the offending grid node and the
simulation time; both are folded into the message so that a single
``str(exc)`` is enough for the CLI report.
"""

from typing import Optional


class RelGasError(Exception):
    """Base class of every error raised by relgas."""

    def __init__(self, message: str, *, node: Optional[int] = None, time: Optional[float] = None):
        self.base_message = message
        self.node = node
        self.time = time
        detail = message
        if node is not None:
            detail += f" at node {node}"
        if time is not None:
            detail += f" (t={time!r})"
        super().__init__(detail)

    def relocated(self, *, node: Optional[int] = None, time: Optional[float] = None) -> "RelGasError":
        """Copy of this error with node/time information replaced."""
        return type(self)(
            self.base_message,
            node=self.node if node is None else node,
            time=self.time if time is None else time,
        )


class DomainError(RelGasError, ValueError):
    """Input outside the admissible domain of a formula."""


class SuperluminalState(DomainError):
    """|v| >= 1 (or >= 1 - velocity margin inside the solver)."""


class NonPositiveStretch(DomainError):
    """phi_xi <= 0: the Lagrangian map is not orientation preserving."""


class DegenerateDenominator(DomainError):
    """Coefficient of phi_tt in the main equation is numerically zero."""


class LossOfHyperbolicity(DomainError):
    """Characteristic quadratic has no real roots."""


class OutOfRange(DomainError):
    """Resampling target outside the mapped Eulerian interval."""


class ProfileError(DomainError):
    """Entropy profile invalid or non-positive on its domain."""


class ConfigError(RelGasError, ValueError):
    """Malformed or inconsistent run configuration."""


class NotApplicable(RelGasError):
    """Conservation law does not hold for the given profile / gamma."""


class InsufficientSamples(RelGasError):
    """Too few sample points for entropy classification."""


class InsufficientSnapshots(RelGasError):
    """Too few trajectory snapshots for a time stencil."""


class NumericalBlowUp(RelGasError):
    """Non-finite values produced by a time step."""


class VerificationFailure(RelGasError):
    """A verification check did not meet its tolerance."""


# Errors that abort a time step; run() turns them into a failure marker.
GUARD_ERRORS = (
    SuperluminalState,
    NonPositiveStretch,
    DegenerateDenominator,
    LossOfHyperbolicity,
    NumericalBlowUp,
)
