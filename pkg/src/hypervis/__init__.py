"""Visibility statistics of lattice points in the hypercube [0, N]^d."""

from hypervis.errors import BudgetError, UsageError
from hypervis.lattice_core import (
    LatticeParams,
    SpectrumSummary,
    distance_sq,
    is_visible,
    normalized_distance,
    sin_between,
    spectrum,
    visibility_gcd,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "LatticeParams",
    "SpectrumSummary",
    "UsageError",
    "distance_sq",
    "is_visible",
    "normalized_distance",
    "sin_between",
    "spectrum",
    "visibility_gcd",
]
