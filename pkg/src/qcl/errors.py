"""Exception types raised by qcl."""


class QclError(Exception):
    """Base class for all library errors."""


class DomainError(QclError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(QclError, ValueError):
    """A matrix does not have the structure required for its space kind."""


class UsageError(QclError, ValueError):
    """An invalid combination of arguments was supplied."""


class IterationCapError(QclError, RuntimeError):
    """A rejection loop exceeded its iteration cap."""
