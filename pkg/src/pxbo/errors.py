"""Exception hierarchy shared across the package."""


class PxboError(Exception):
    """Base class for all package errors."""


class ArgumentError(PxboError, ValueError):
    """A caller-supplied argument violates a precondition."""


class FormatError(PxboError):
    """A file (manifest, snapshot) is missing, malformed, or wrong version."""


class SizeError(PxboError):
    """Binary payload size disagrees with the declared shape."""


class DataError(PxboError):
    """Data contains invalid values (non-finite entries, missing scores)."""


class ConsistencyError(PxboError):
    """A referenced location or record is unknown to the receiving model."""


class StateError(PxboError):
    """Operation invoked in the wrong session phase."""


class CapacityError(PxboError):
    """Requested sample count exceeds what the grid can provide."""


class ConditioningError(PxboError):
    """Kernel matrix factorization failed even after jitter escalation."""


class DeadlockError(PxboError):
    """A headless run suspended with no channel able to answer it."""
