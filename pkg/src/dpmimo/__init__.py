"""Dual-polarized XL-MIMO modeling and transmit covariance optimization.

Models per-antenna cross-polarization discrimination (XPD) over extremely
large arrays, computes the non-uniform-XPD near/far-field boundary in closed
form and by numerical search, and optimizes the transmit covariance through a
structured-permanent capacity upper bound with a penalty-method power
allocator.
"""

__version__ = "0.1.0"

from .errors import (
    ChiTwoDomainError,
    ConfigError,
    InfeasibleConstraintError,
    NumericalFailure,
    PermanentGuardError,
    UntiedStatsError,
)

__all__ = [
    "ChiTwoDomainError",
    "ConfigError",
    "InfeasibleConstraintError",
    "NumericalFailure",
    "PermanentGuardError",
    "UntiedStatsError",
    "__version__",
]
