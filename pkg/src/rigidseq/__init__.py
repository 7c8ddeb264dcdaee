"""Constructions and finite certificates for rigidity and non-recurrence
sequences of measure-preserving systems."""
from .contfrac import ContinuedFraction
from .errors import (ConstructionError, InvariantViolation, PrecisionError, ResourceError,
                     RigidseqError)
from .sequences import IntSequence

__version__ = "0.1.0"

__all__ = [
    "ContinuedFraction",
    "ConstructionError",
    "IntSequence",
    "InvariantViolation",
    "PrecisionError",
    "ResourceError",
    "RigidseqError",
    "__version__",
]
