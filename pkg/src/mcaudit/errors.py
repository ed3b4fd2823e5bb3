"""Exception types shared across the package.

Everything derives from McAuditError so callers (and the command-line
front end) can catch one base class and map it to a nonzero exit.
"""


class McAuditError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSeed(McAuditError, ValueError):
    """Seed lies outside the generator's valid seed domain."""


class DomainError(McAuditError, ValueError):
    """Argument outside a function's mathematical domain."""


class EmptySample(McAuditError, ValueError):
    """An operation that needs data received an empty sample."""


class OutOfRangeSample(McAuditError, ValueError):
    """A sample value fell outside the declared interval."""


class InsufficientSample(McAuditError, ValueError):
    """Sample too small for the test's adequacy rule."""


class ZeroVariance(McAuditError, ValueError):
    """Correlation is undefined because a series is constant."""


class LengthMismatch(McAuditError, ValueError):
    """Paired series differ in length."""


class SampleTooSmall(McAuditError, ValueError):
    """Too few observations for the normal-approximation interval."""


class BudgetExceeded(McAuditError, RuntimeError):
    """Requested draw count exceeds an enforced period budget."""
