"""Two-atom geometry near a cylindrical fibre, and the dielectric medium.

Atom A sits at cylindrical coordinates (R_A, 0, 0), atom B at
(R_B, delta_phi, delta_z); the fibre axis is the z axis and the fibre
surface is rho = a.  All lengths in nanometres, angles in radians.
"""

import math
from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class PairGeometry:
    a_nm: float
    r_a_nm: float
    r_b_nm: float
    delta_phi: float = 0.0
    delta_z_nm: float = 0.0
    axis_theta: float = 0.0
    axis_phi: float = 0.0

    def __post_init__(self):
        if self.a_nm < 0:
            raise GeometryError("fibre radius must be >= 0")
        if self.r_a_nm <= self.a_nm or self.r_b_nm <= self.a_nm:
            raise GeometryError("both atoms must sit outside the fibre (R > a)")

    @classmethod
    def lateral(cls, a_nm, r_nm, delta_z_nm, axis_theta=0.0, axis_phi=0.0):
        """Lateral configuration: equal radii, delta_phi = 0."""
        return cls(a_nm, r_nm, r_nm, 0.0, delta_z_nm, axis_theta, axis_phi)

    @property
    def axis(self):
        return (self.axis_theta, self.axis_phi)

    @property
    def pos_a(self):
        return np.array([self.r_a_nm, 0.0, 0.0])

    @property
    def pos_b(self):
        return np.array(
            [
                self.r_b_nm * math.cos(self.delta_phi),
                self.r_b_nm * math.sin(self.delta_phi),
                self.delta_z_nm,
            ]
        )

    @property
    def r_ab_nm(self):
        """Interatomic distance; reduces to sqrt(dz^2 + 4 R^2 sin^2(dphi/2))
        for equal radii."""
        return float(np.linalg.norm(self.pos_a - self.pos_b))

    @property
    def cos_axis_angle(self):
        """Cosine of the angle between the interatomic axis and the fibre axis."""
        d = self.pos_b - self.pos_a
        n = np.linalg.norm(d)
        if n == 0:
            raise GeometryError("coincident atoms")
        return float(d[2] / n)

    def with_delta_z(self, delta_z_nm):
        return PairGeometry(
            self.a_nm, self.r_a_nm, self.r_b_nm, self.delta_phi,
            delta_z_nm, self.axis_theta, self.axis_phi,
        )


@dataclass(frozen=True)
class Medium:
    """Dielectric with static relative permittivity eps(0) > 1."""

    eps_static: float

    def __post_init__(self):
        if not self.eps_static > 1.0:
            raise GeometryError("static permittivity must exceed 1")

    @property
    def n_static(self):
        return math.sqrt(self.eps_static)

    @property
    def image_strength(self):
        """(n(0)^2 - 1)/(n(0)^2 + 1), the electrostatic image factor."""
        return (self.eps_static - 1.0) / (self.eps_static + 1.0)


@dataclass(frozen=True)
class CylQuadParams:
    """Knobs for the cylinder mode sum and wavenumber quadrature."""

    m_max: int = 120
    rel_tol: float = 1e-8
    k_max_scale: float = 40.0
    nodes_per_panel: int = 12
    max_refinements: int = 2


DEFAULT_QUAD = CylQuadParams()
