"""Exception hierarchy shared by all modules."""


class LfmoError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LfmoError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(LfmoError, ValueError):
    """The request exceeds what an exact method can handle."""


class DegenerateModelError(LfmoError, ValueError):
    """The model cannot produce finite failure times (e.g. a zero subordinator)."""


class ValidationError(LfmoError, ValueError):
    """A structure, signature or configuration failed validation."""
