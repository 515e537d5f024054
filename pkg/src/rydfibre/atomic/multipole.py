"""Dipole and quadrupole matrix elements in the lab frame.

Spherical components are evaluated in the quantisation frame via the
Wigner-Eckart theorem (M_J defined along the axis), then rotated to the
lab frame with R = R_z(Phi) R_y(Theta), which maps the frame z axis onto
the quantisation direction (sin T cos P, sin T sin P, cos T).

Conventions:

* dipole operator d = -e r (atomic units, e = 1), so the returned
  Cartesian vector is <to| d |from> = -<to| r |from>;
* quadrupole operator Q = -(e/2) r (x) r, returned as the full traceful
  symmetric 3x3 tensor <to| Q |from>;
* a pure q-component transition has the frame-Cartesian polarization
  c_{+1} = (-e_x + i e_y)/sqrt(2), c_0 = e_z, c_{-1} = (e_x + i e_y)/sqrt(2).
"""

import math
from functools import lru_cache

import numpy as np

from ..angular import clebsch_gordan, reduced_c_tensor, wigner_6j
from .radial import RadialSolver
from .states import AtomState

TWO_S = 1  # single valence electron, S = 1/2


class ForbiddenTransitionError(ValueError):
    pass


def rotation_matrix(theta, phi):
    """R = R_z(phi) R_y(theta); columns are the frame axes in lab coordinates."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [ct * cp, -sp, st * cp],
            [ct * sp, cp, st * sp],
            [-st, 0.0, ct],
        ]
    )


@lru_cache(maxsize=None)
def _j_reduced_c(l_bra, two_j_bra, k, l_ket, two_j_ket):
    """<L' 1/2 J' || C^k || L 1/2 J> for a spin-1/2 spectator."""
    lsum = reduced_c_tensor(l_bra, k, l_ket)
    if lsum == 0.0:
        return 0.0
    phase = (-1) ** ((2 * l_bra + TWO_S + two_j_ket) // 2 + k)
    six = wigner_6j(2 * l_bra, two_j_bra, TWO_S, two_j_ket, 2 * l_ket, 2 * k)
    return (
        phase
        * math.sqrt((two_j_bra + 1.0) * (two_j_ket + 1.0))
        * six
        * lsum
    )


@lru_cache(maxsize=None)
def angular_c_component(l_bra, two_j_bra, two_mj_bra, k, q2, l_ket, two_j_ket, two_mj_ket):
    """<L' J' M'| C^k_q |L J M> with q2 = 2q (doubled)."""
    red = _j_reduced_c(l_bra, two_j_bra, k, l_ket, two_j_ket)
    if red == 0.0:
        return 0.0
    cg = clebsch_gordan(two_j_ket, two_mj_ket, 2 * k, q2, two_j_bra, two_mj_bra)
    return cg * red / math.sqrt(two_j_bra + 1.0)


def dipole_allowed(a: AtomState, b: AtomState):
    return (
        abs(a.l - b.l) == 1
        and abs(a.two_j - b.two_j) <= 2
        and abs(a.two_mj - b.two_mj) <= 2
    )


def quadrupole_allowed(a: AtomState, b: AtomState):
    if (a.l + b.l) % 2 != 0 or abs(a.l - b.l) > 2:
        return False
    if a.l == 0 and b.l == 0:
        return False
    if abs(a.two_j - b.two_j) > 4 or a.two_j + b.two_j < 4:
        return False
    return abs(a.two_mj - b.two_mj) <= 4


# frame-Cartesian polarization vectors of pure spherical components
_POLARIZATION = {
    +1: np.array([-1.0, 1.0j, 0.0]) / math.sqrt(2.0),
    0: np.array([0.0, 0.0, 1.0]),
    -1: np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0),
}


def dipole_vector(solver: RadialSolver, from_state, to_state, axis=(0.0, 0.0)):
    """Lab-frame Cartesian 3-vector <to| d |from> for a dipole transition.

    `axis` is the quantisation direction (Theta, Phi) in radians; the
    states' M_J are defined along it.
    """
    if not dipole_allowed(from_state, to_state):
        raise ForbiddenTransitionError(
            f"dipole-forbidden: {from_state} -> {to_state}"
        )
    q2 = to_state.two_mj - from_state.two_mj
    ang = angular_c_component(
        to_state.l, to_state.two_j, to_state.two_mj,
        1, q2,
        from_state.l, from_state.two_j, from_state.two_mj,
    )
    if ang == 0.0:
        raise ForbiddenTransitionError(
            f"vanishing angular factor: {from_state} -> {to_state}"
        )
    radial = solver.radial_integral(from_state, to_state, power=1)
    amp = -radial * ang  # d = -e r
    frame_vec = amp * _POLARIZATION[q2 // 2]
    theta, phi = axis
    return rotation_matrix(theta, phi) @ frame_vec


# --- rank-2 Cartesian reconstruction -----------------------------------
# C^2_q(rhat) = rhat . E_q . rhat; the Gram matrix of the E_q inverts the
# expansion  rhat (x) rhat - I/3 = sum_q a_q E_q  with a = G^-1 c,
# c_q = <C^2_q>.

_SQ32 = math.sqrt(1.5)
_SQ38 = math.sqrt(3.0 / 8.0)


def _e_matrices():
    e = {}
    e[0] = np.diag([-0.5, -0.5, 1.0]).astype(complex)
    for s in (+1, -1):
        m = np.zeros((3, 3), dtype=complex)
        m[0, 2] = m[2, 0] = -s * _SQ32 / 2.0
        m[1, 2] = m[2, 1] = -1.0j * _SQ32 / 2.0
        e[s] = m
        mm = np.zeros((3, 3), dtype=complex)
        mm[0, 0] = _SQ38
        mm[1, 1] = -_SQ38
        mm[0, 1] = mm[1, 0] = s * 1.0j * _SQ38
        e[2 * s] = mm
    return e


_E_Q = _e_matrices()
_QS = (-2, -1, 0, 1, 2)
_GRAM_INV = np.linalg.inv(
    np.array([[np.sum(_E_Q[qa] * _E_Q[qb].T) for qb in _QS] for qa in _QS])
)


def quadrupole_tensor(solver: RadialSolver, from_state, to_state, axis=(0.0, 0.0)):
    """Lab-frame symmetric 3x3 tensor <to| Q |from>, Q = -(1/2) r (x) r.

    Transitions outside quadrupole reach (|dL| > 2 or |dM_J| > 2) raise;
    reachable but selection-rule-suppressed ones (e.g. parity-odd) return
    the zero tensor.  The scalar (trace) part is kept between states of
    equal (L, J, M_J) with L > 0; it drops out of the interaction anyway
    because the propagator gradients are traceless and divergence-free.
    """
    a, b = from_state, to_state
    if abs(a.l - b.l) > 2 or abs(a.two_mj - b.two_mj) > 4 or (a.l == 0 and b.l == 0):
        raise ForbiddenTransitionError(
            f"outside quadrupole reach: {from_state} -> {to_state}"
        )

    r2 = solver.radial_integral(a, b, power=2)
    frame = np.zeros((3, 3), dtype=complex)

    # scalar (trace) part: (r^2/3) delta_ij between same-(L,J,M) states
    if a.l == b.l and a.two_j == b.two_j and a.two_mj == b.two_mj and a.l > 0:
        frame += np.eye(3) * (r2 / 3.0)

    # rank-2 part
    if quadrupole_allowed(a, b):
        c_vec = np.array(
            [
                angular_c_component(
                    b.l, b.two_j, b.two_mj, 2, 2 * q, a.l, a.two_j, a.two_mj
                )
                for q in _QS
            ],
            dtype=complex,
        )
        if np.any(c_vec != 0.0):
            coeff = _GRAM_INV @ c_vec
            frame += r2 * sum(coeff[i] * _E_Q[q] for i, q in enumerate(_QS))

    theta, phi = axis
    rot = rotation_matrix(theta, phi)
    lab = rot @ frame @ rot.T
    return -0.5 * lab  # Q = -(e/2) r (x) r
