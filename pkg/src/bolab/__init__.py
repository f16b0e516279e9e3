"""Numerical lab for Benjamin-Ono multisolitons, Lax spectra, scattering and soliton resolution."""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    BlowUpError,
    BOLabError,
    ConfigError,
    NonConvergenceError,
    NumericalError,
    SingularityError,
    TruncationError,
)
from .field import Grid1D, HardyCoeffs, SampledField, norm, szego_project
from .solitons import SolitonFamily, SolitonParam, soliton_profile
from .engine import AsymptoticSpectrum, exact_solution, soliton_sum

__all__ = [
    "__version__",
    "AccuracyError",
    "BlowUpError",
    "BOLabError",
    "ConfigError",
    "NonConvergenceError",
    "NumericalError",
    "SingularityError",
    "TruncationError",
    "Grid1D",
    "HardyCoeffs",
    "SampledField",
    "norm",
    "szego_project",
    "SolitonFamily",
    "SolitonParam",
    "soliton_profile",
    "AsymptoticSpectrum",
    "exact_solution",
    "soliton_sum",
]
