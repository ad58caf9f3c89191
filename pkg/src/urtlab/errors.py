"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """A domain object or parameter violates its declared invariants."""


class PreconditionError(RuntimeError):
    """A numeric precondition (horizon, radius, series length) is not met."""


class WindowRadiusError(PreconditionError):
    """The window is too small for the requested local computation."""


class CapExceededError(RuntimeError):
    """A generator hit its configured vertex cap before finishing."""
