"""Exception hierarchy shared by all modules."""


class FincatError(Exception):
    """Base class for every error raised by this package."""


class InvalidStateError(FincatError, ValueError):
    """A probability vector, Gibbs state or density matrix is malformed."""


class DimensionMismatchError(FincatError, ValueError):
    pass


class SizeCapError(FincatError):
    """A product distribution would exceed the configured entry cap."""


class NotMajorizedError(FincatError, ValueError):
    pass


class UndefinedRateError(FincatError, ValueError):
    """The target carries no resource, so the rate has no finite value."""


class NoFiniteNError(FincatError, ValueError):
    """No finite number of copies can push the rate above one."""


class FeasibilityOnlyError(FincatError, ValueError):
    """Protocol simulation requested for a setting we only check feasibility for."""


class InfeasibleContourError(FincatError, ValueError):
    """Requested entropy exceeds ln d, so the contour is empty."""
