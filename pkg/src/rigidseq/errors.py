"""Exception types shared across the package."""


class RigidseqError(Exception):
    """Base class for all package errors."""


class ConstructionError(RigidseqError, ValueError):
    """Invalid parameters for a sequence, measure, tower or system."""


class ResourceError(RigidseqError, RuntimeError):
    """A search or enumeration ran out of its configured budget.

    ``partial`` carries whatever progress was made before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PrecisionError(RigidseqError, ArithmeticError):
    """The working precision cannot certify the requested quantity."""

    def __init__(self, message, required_bits=None, index=None):
        super().__init__(message)
        self.required_bits = required_bits
        self.index = index


class InvariantViolation(RigidseqError, AssertionError):
    """An internal postcondition failed; this indicates a bug."""
