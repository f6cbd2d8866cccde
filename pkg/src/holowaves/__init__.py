"""Pseudospectral simulation and verification tools for two-dimensional
infinite-depth gravity water waves in holomorphic coordinates."""

from .spectral import GridSpec, SpectralField
from .waterwave import (
    ChordArcViolation,
    DiffState,
    InfeasibleData,
    LawsonRK4,
    NaNDetected,
    WaterState,
    compute_aux,
    evolve,
    linear_propagator,
    make_localized_data,
    rhs_diff,
    rhs_wq,
    step,
)

__all__ = [
    "GridSpec",
    "SpectralField",
    "ChordArcViolation",
    "DiffState",
    "InfeasibleData",
    "LawsonRK4",
    "NaNDetected",
    "WaterState",
    "compute_aux",
    "evolve",
    "linear_propagator",
    "make_localized_data",
    "rhs_diff",
    "rhs_wq",
    "step",
]

__version__ = "0.1.0"
