"""Reflected propagator of a dielectric half-space (plane x = a).

The fibre surface near the atoms is approximated by the plane x = a with
the dielectric filling x < a.  In the static limit the reflection is the
classical image construction: a source at r gets an image at
mirror(r) = (2a - x, y, z) with strength -(eps-1)/(eps+1), giving

    T1_ij(r_A, r_B) = (beta/4pi) F_ik(v) M_kj,
    v = r_A - mirror(r_B),   M = diag(-1, 1, 1),
    beta = (n(0)^2 - 1)/(n(0)^2 + 1).

Same index conventions as `free`.  Gradients are analytic.
"""

import numpy as np

from ..constants import FOUR_PI
from .free import _f_grad, _f_grad2, _f_tensor

_MIRROR = np.diag([-1.0, 1.0, 1.0])


class AtomInsideMediumError(ValueError):
    pass


def _check_outside(pos, a_nm):
    if pos[0] <= a_nm:
        raise AtomInsideMediumError(
            f"atom at x={pos[0]:.3f} nm is not outside the plane x={a_nm:.3f} nm"
        )


def _mirror(pos, a_nm):
    return np.array([2.0 * a_nm - pos[0], pos[1], pos[2]])


def t1_halfspace_points(pos_a, pos_b, a_nm, medium):
    pos_a = np.asarray(pos_a, float)
    pos_b = np.asarray(pos_b, float)
    _check_outside(pos_a, a_nm)
    _check_outside(pos_b, a_nm)
    v = pos_a - _mirror(pos_b, a_nm)
    beta = medium.image_strength
    return beta / FOUR_PI * _f_tensor(v) @ _MIRROR


def t1_halfspace(geometry, medium):
    """Reflected tensor of the half-space x < a."""
    return t1_halfspace_points(geometry.pos_a, geometry.pos_b, geometry.a_nm, medium)


def t1_halfspace_zz(x_nm, delta_z_nm, medium):
    """Closed form of the zz component in the lateral configuration,
    with X the atom-surface distance:

        (beta/4pi) ((2X)^2 - 2 dz^2) / ((2X)^2 + dz^2)^(5/2)
    """
    beta = medium.image_strength
    num = (2.0 * x_nm) ** 2 - 2.0 * delta_z_nm**2
    den = ((2.0 * x_nm) ** 2 + delta_z_nm**2) ** 2.5
    return beta / FOUR_PI * num / den


def grad_t1_halfspace(geometry, medium, which="B"):
    pos_a, pos_b, a_nm = geometry.pos_a, geometry.pos_b, geometry.a_nm
    _check_outside(pos_a, a_nm)
    _check_outside(pos_b, a_nm)
    v = pos_a - _mirror(pos_b, a_nm)
    beta = medium.image_strength
    fg = _f_grad(v)  # [i, p, m] = dF_ip/dv_m
    if which.upper() == "A":
        # dv/dA_l = delta
        return beta / FOUR_PI * np.einsum("ipl,pj->ijl", fg, _MIRROR)
    # dv_m/dB_l = -M_ml
    return -beta / FOUR_PI * np.einsum("ipm,ml,pj->ijl", fg, _MIRROR, _MIRROR)


def grad2_t1_halfspace(geometry, medium):
    """d^2 T1 / d r_A,k d r_B,l, shape (3, 3, 3, 3) indexed [i, j, k, l]."""
    pos_a, pos_b, a_nm = geometry.pos_a, geometry.pos_b, geometry.a_nm
    _check_outside(pos_a, a_nm)
    _check_outside(pos_b, a_nm)
    v = pos_a - _mirror(pos_b, a_nm)
    beta = medium.image_strength
    fg2 = _f_grad2(v)  # [i, p, k, m]
    return -beta / FOUR_PI * np.einsum("ipkm,ml,pj->ijkl", fg2, _MIRROR, _MIRROR)
