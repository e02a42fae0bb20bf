"""Exception types shared across the package.

Everything derives from :class:`CrheatError` so callers can catch the whole
family at once.  Validation problems double as ``ValueError`` and runtime
numerical failures as ``RuntimeError``, which keeps the exceptions usable
in generic code that only knows the standard hierarchy.
"""


class CrheatError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(CrheatError, ValueError):
    """A dimension argument is not an integer >= the allowed minimum."""


class DimensionMismatchError(CrheatError, ValueError):
    """Two objects that must share a dimension do not."""


class DegenerateStateError(CrheatError, ValueError):
    """A state vector has zero (or numerically zero) norm."""


class StateInvariantError(CrheatError, ValueError):
    """A density operator or ket violates its defining invariants."""


class NonHermitianError(CrheatError, ValueError):
    """An operator that must be Hermitian is not, beyond tolerance."""


class StepTooLargeError(CrheatError, RuntimeError):
    """A stochastic time step produced a total jump probability >= 0.1.

    First-order jump unraveling is only meaningful when the per-step jump
    probability is small; rather than silently degrade, the step is refused.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class StepUnderflowError(CrheatError, RuntimeError):
    """The adaptive integrator could not make progress at the requested
    tolerance: the step size underflowed.  ``t_reached`` records how far
    the integration got."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(message)
        self.t_reached = t_reached


class SteadyStateError(CrheatError, RuntimeError):
    """The steady-state solve failed: singular bordered system (multiple
    steady states) or a residual above tolerance."""


class NumericalError(CrheatError, RuntimeError):
    """An evolution violated a monitored invariant (trace drift,
    positivity, Hermiticity) beyond its documented tolerance."""


class ConfigError(CrheatError, ValueError):
    """A scenario configuration file is malformed.  ``field`` names the
    offending entry when one can be identified."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
