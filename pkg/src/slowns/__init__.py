"""Pseudospectral solvers and decay diagnostics for a singularly perturbed
Navier-Stokes system with one slow vertical variable."""

from .grid import Grid, ScalarField, Space, VectorField
from .ns25d import SliceStackState, Trajectory, biot_savart, energy_ledger
from .ns3d import State3D, lift_initial_data

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "ScalarField",
    "Space",
    "VectorField",
    "SliceStackState",
    "Trajectory",
    "State3D",
    "biot_savart",
    "energy_ledger",
    "lift_initial_data",
    "__version__",
]
