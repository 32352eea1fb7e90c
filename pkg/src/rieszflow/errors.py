"""Exception types shared across the package."""


class RieszflowError(Exception):
    """Base class for all package errors."""


class GridMismatch(RieszflowError):
    """Fields defined on different grids were combined."""


class NonPositiveDensity(RieszflowError):
    """An operation requiring min(rho) > 0 received a non-positive density."""


class NonFinite(RieszflowError):
    """A computed field contains NaN or Inf."""


class ZeroWavevector(RieszflowError):
    """A per-mode operation was called with k = 0."""


class WrongRegime(RieszflowError):
    """A blow-up criterion was evaluated outside its parameter regime."""


class ParticleCollision(RieszflowError):
    """Unsoftened pairwise distance underflowed."""


class TupleOrderMismatch(RieszflowError):
    """Multi-index tuple orders do not sum to the requested total order."""


class NonPositiveFunction(RieszflowError):
    """A test function that must be strictly positive is not."""


class SchemaError(RieszflowError):
    """Configuration failed validation.  Carries every violation found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class FormatError(RieszflowError):
    """A binary snapshot file is malformed (bad magic, version, or truncation)."""


class GuardTripped(RieszflowError):
    """A blow-up guard fired during time stepping.

    Attributes:
        reason: one of "max_grad_u", "density_floor", "spectral_tail".
        time: simulation time at the trip.
        state: the FlowState at the trip.
    """

    def __init__(self, reason, time, state):
        self.reason = reason
        self.time = time
        self.state = state
        super().__init__(f"guard {reason} tripped at t={time:.6g}")


class CflViolation(UserWarning):
    """Advisory warning: dt exceeds the CFL estimate."""
