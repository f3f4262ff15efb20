"""Optical rates, dark states and polaron corrections for dimers of dipolar monomers."""

__version__ = "0.1.0"

from .bath import BathSpec, gamma, spectral_density
from .dynamics import build_rate_matrix, dark_report, evolve, gibbs_populations, steady_state
from .eigen import EigenSystem, diagonalize
from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    DimerError,
    MultipleSteadyStatesError,
    NumericalError,
    PreconditionError,
)
from .model import DimerConfig, coupling_constant, make_dimer

__all__ = [
    "BathSpec",
    "ConfigError",
    "DegenerateSpectrumError",
    "DimerConfig",
    "DimerError",
    "EigenSystem",
    "MultipleSteadyStatesError",
    "NumericalError",
    "PreconditionError",
    "build_rate_matrix",
    "coupling_constant",
    "dark_report",
    "diagonalize",
    "evolve",
    "gamma",
    "gibbs_populations",
    "make_dimer",
    "spectral_density",
    "steady_state",
]
