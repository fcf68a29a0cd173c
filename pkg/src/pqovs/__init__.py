"""Pair-coherent optical vortex states, their lens transform and Wigner functions."""

from .errors import (
    AccuracyError,
    BracketingError,
    DegenerateCircleError,
    DomainTooSmallError,
    InvalidArgumentError,
    NumericalError,
    PQOVSError,
    TruncationError,
    UnsupportedRangeError,
)
from .states import OpticalConfig, VortexSpec, derive_scales

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "OpticalConfig",
    "VortexSpec",
    "derive_scales",
    "PQOVSError",
    "InvalidArgumentError",
    "UnsupportedRangeError",
    "NumericalError",
    "AccuracyError",
    "TruncationError",
    "DomainTooSmallError",
    "DegenerateCircleError",
    "BracketingError",
]
