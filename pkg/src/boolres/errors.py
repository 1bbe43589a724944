"""Exception hierarchy shared by every module."""


class BoolresError(Exception):
    """Base class for package errors."""


class DomainError(BoolresError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CalibrationLookupError(BoolresError, LookupError):
    """A delay-line element count has no row in the calibration table."""


class ResourceError(BoolresError, RuntimeError):
    """A run exceeded a resource cap (e.g. runaway oscillation)."""
