"""Exception hierarchy. Each class maps onto one CLI exit code."""


class SnrlabError(Exception):
    exit_code = 1


class UsageError(SnrlabError, ValueError):
    exit_code = 2


class SizeError(UsageError):
    """Length is not a power of two, or operands disagree in length."""


class DomainError(UsageError):
    """Argument outside the mathematical domain of an operation."""


class AggregationError(UsageError):
    """Empty or mixed trial ensemble."""


class DegenerateSceneError(UsageError):
    """Scene cannot be normalized to the requested photon budget."""


class CapacityError(SnrlabError):
    exit_code = 3


class SnrlabIOError(SnrlabError, OSError):
    exit_code = 4
