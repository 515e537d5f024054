"""Static (nonretarded) propagator tensors: vacuum, half-space, cylinder.

The full propagator is T = T0 + T1 with T0 the free-space part and T1
the part reflected off the dielectric.  All tensors are real 3x3 arrays
in nm^-3; see `free` for the index conventions shared by the gradient
arrays.
"""

import numpy as np

from .cylinder import (
    QuadratureConvergenceError,
    grad2_t1_cylinder,
    grad_t1_cylinder,
    t1_cylinder,
    t1_cylinder_points,
)
from .free import CoincidentAtomsError, grad2_t0, grad_t0, t0, t0_points
from .geometry import DEFAULT_QUAD, CylQuadParams, GeometryError, Medium, PairGeometry
from .halfspace import (
    AtomInsideMediumError,
    grad2_t1_halfspace,
    grad_t1_halfspace,
    t1_halfspace,
    t1_halfspace_points,
    t1_halfspace_zz,
)

SURFACES = ("vacuum", "halfspace", "cylinder")


def t1(geometry, medium, surface="cylinder", params=DEFAULT_QUAD):
    """Reflected tensor for the requested surface model ('vacuum' -> zeros)."""
    if surface == "vacuum" or medium is None:
        return np.zeros((3, 3))
    if surface == "halfspace":
        return t1_halfspace(geometry, medium)
    if surface == "cylinder":
        return t1_cylinder(geometry, medium, params)
    raise ValueError(f"unknown surface model {surface!r}")


def grad_t(geometry, medium=None, which="B", part="free", surface="cylinder",
           params=DEFAULT_QUAD):
    """Gradient of the free or reflected tensor at one atom's position.

    Analytic for T0 and the half-space; Richardson-extrapolated central
    differences for the cylinder.
    """
    if part == "free":
        return grad_t0(geometry, which)
    if part != "reflected":
        raise ValueError("part must be 'free' or 'reflected'")
    if surface == "vacuum" or medium is None:
        return np.zeros((3, 3, 3))
    if surface == "halfspace":
        return grad_t1_halfspace(geometry, medium, which)
    if surface == "cylinder":
        return grad_t1_cylinder(geometry, medium, which, params)
    raise ValueError(f"unknown surface model {surface!r}")


def grad2_t(geometry, medium=None, part="free", surface="cylinder",
            params=DEFAULT_QUAD):
    """Mixed second gradient d^2 T / dr_A dr_B (for quadrupole-quadrupole)."""
    if part == "free":
        return grad2_t0(geometry)
    if part != "reflected":
        raise ValueError("part must be 'free' or 'reflected'")
    if surface == "vacuum" or medium is None:
        return np.zeros((3, 3, 3, 3))
    if surface == "halfspace":
        return grad2_t1_halfspace(geometry, medium)
    if surface == "cylinder":
        return grad2_t1_cylinder(geometry, medium, params)
    raise ValueError(f"unknown surface model {surface!r}")


def anisotropy_coeffs(t1_matrix):
    """(DeltaT, T_m) of a reflected tensor in the lateral-configuration frame:

    DeltaT = ([T1]_xx - [T1]_yy)/2,
    T_m    = [T1]_zz - ([T1]_xx + [T1]_yy)/2.
    """
    t1_matrix = np.asarray(t1_matrix)
    delta_t = 0.5 * (t1_matrix[0, 0] - t1_matrix[1, 1])
    t_m = t1_matrix[2, 2] - 0.5 * (t1_matrix[0, 0] + t1_matrix[1, 1])
    return float(delta_t), float(t_m)


__all__ = [
    "PairGeometry",
    "Medium",
    "CylQuadParams",
    "DEFAULT_QUAD",
    "GeometryError",
    "CoincidentAtomsError",
    "AtomInsideMediumError",
    "QuadratureConvergenceError",
    "t0",
    "t0_points",
    "t1",
    "t1_halfspace",
    "t1_halfspace_points",
    "t1_halfspace_zz",
    "t1_cylinder",
    "t1_cylinder_points",
    "grad_t",
    "grad2_t",
    "grad_t0",
    "grad2_t0",
    "grad_t1_halfspace",
    "grad2_t1_halfspace",
    "grad_t1_cylinder",
    "grad2_t1_cylinder",
    "anisotropy_coeffs",
    "SURFACES",
]
