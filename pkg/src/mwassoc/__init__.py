"""Microwave association of ultracold polar molecules.

Bound states of trap-modified diatomic potentials, vibrationally averaged
dipole matrix elements, and the association scans built on them.
"""

from .errors import (
    ClassificationError,
    ConfigurationError,
    InvalidArgumentError,
    NumericalError,
    ParseError,
)

__version__ = "0.1.0"

__all__ = [
    "ClassificationError",
    "ConfigurationError",
    "InvalidArgumentError",
    "NumericalError",
    "ParseError",
]
