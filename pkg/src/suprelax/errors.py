"""Exception types shared across the library."""


class SuprelaxError(Exception):
    """Base class for library errors."""


class DomainError(SuprelaxError):
    """An operand range left the domain of a unary function."""


class PartitionMismatchError(SuprelaxError):
    """Binary operation on summands with incompatible partitions/domains."""


class InfeasibleBoundError(SuprelaxError):
    """Range-tightening bound does not intersect the relaxation range."""


class ModelError(SuprelaxError):
    """Malformed network weights file."""
