"""Pseudo-spectral Keller-Segel simulator with logistic-type source."""

from ._accel import backend
from .model import DerivedConstants, InitialDataNorms, ModelParams, derive_constants, equilibrium
from .field import Grid, ScalarField, SpectralField
from .integrator import SimulationState, StepControl, run, step

__version__ = "0.1.0"

__all__ = [
    "DerivedConstants",
    "Grid",
    "InitialDataNorms",
    "ModelParams",
    "ScalarField",
    "SimulationState",
    "SpectralField",
    "StepControl",
    "backend",
    "derive_constants",
    "equilibrium",
    "run",
    "step",
]
