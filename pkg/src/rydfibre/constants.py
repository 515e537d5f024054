"""Physical constants and unit conversions.

Unit conventions used throughout the package:

* atomic structure (radial integrals, dipole and quadrupole moments):
  Hartree atomic units;
* geometry: nanometres internally, micrometres at the CLI/plot boundary;
* energies and detunings everywhere outside the radial solver: GHz
  (as ordinary frequencies, E/h).

Propagator tensors are expressed in nm^-3 (gradients in nm^-4, second
gradients in nm^-5).  The conversion factors below turn a multipole
contraction with such a tensor directly into GHz.
"""

import math

# CODATA 2018
E_CHARGE = 1.602176634e-19          # C
EPSILON_0 = 8.8541878128e-12        # F/m
PLANCK_H = 6.62607015e-34           # J s
BOHR_RADIUS_M = 5.29177210903e-11   # m
RYDBERG_INF_GHZ = 3.2898419602508e6  # Rydberg frequency c*R_inf, GHz

BOHR_RADIUS_NM = BOHR_RADIUS_M * 1e9
HARTREE_GHZ = 2.0 * RYDBERG_INF_GHZ

# Mass-corrected Rydberg constant for 87Rb: R_M = R_inf / (1 + m_e/M).
# M(87Rb) = 86.909180531 u (AME2020), 1 u = 1822.888486209 m_e.
_MASS_RATIO_RB87 = 86.909180531 * 1822.888486209
RYDBERG_RB87_GHZ = RYDBERG_INF_GHZ / (1.0 + 1.0 / _MASS_RATIO_RB87)

# (e a0)^2 / (epsilon_0 h): dipole(a.u.) . T(nm^-3) . dipole(a.u.) -> GHz
K_DD_GHZ = (E_CHARGE * BOHR_RADIUS_M) ** 2 / (EPSILON_0 * PLANCK_H) * 1e27 * 1e-9
# dipole(a.u.) . gradT(nm^-4) . quadrupole(a.u.) -> GHz
K_DQ_GHZ = K_DD_GHZ * BOHR_RADIUS_NM
# quadrupole(a.u.) . gradgradT(nm^-5) . quadrupole(a.u.) -> GHz
K_QQ_GHZ = K_DD_GHZ * BOHR_RADIUS_NM ** 2

FOUR_PI = 4.0 * math.pi

MHZ_PER_GHZ = 1e3
NM_PER_UM = 1e3
UM6_PER_NM6 = 1e-18


def ghz_um6_from_ghz_nm6(value):
    """Convert a C6-like quantity from GHz nm^6 to GHz um^6."""
    return value * UM6_PER_NM6
