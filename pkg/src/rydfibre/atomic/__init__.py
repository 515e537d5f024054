"""Rubidium Rydberg single-atom structure.

Energies from Rydberg-Ritz quantum defects, radial wavefunctions and
matrix elements from inward Numerov integration, and dipole/quadrupole
matrix elements for an arbitrary quantisation axis.
"""

from .defects import MissingSeriesError, QuantumDefectTable, hydrogen_table, load_defects
from .multipole import (
    ForbiddenTransitionError,
    dipole_allowed,
    dipole_vector,
    quadrupole_allowed,
    quadrupole_tensor,
    rotation_matrix,
)
from .radial import RadialConvergenceError, RadialSolver
from .states import AtomState, InvalidStateError

__all__ = [
    "AtomState",
    "InvalidStateError",
    "QuantumDefectTable",
    "MissingSeriesError",
    "load_defects",
    "hydrogen_table",
    "RadialSolver",
    "RadialConvergenceError",
    "ForbiddenTransitionError",
    "dipole_allowed",
    "dipole_vector",
    "quadrupole_allowed",
    "quadrupole_tensor",
    "rotation_matrix",
]
