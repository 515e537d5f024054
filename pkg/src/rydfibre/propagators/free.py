"""Free-space static propagator and its gradients.

T0(r_A, r_B) = -(1/4pi r^3) (I - 3 u (x) u), u along the interatomic axis.
Index conventions (shared by every propagator module):

* tensor[i, j]:          i pairs with atom A, j with atom B;
* grad[i, j, k]:         d T_ij / d r_{K,k} for the requested atom K;
* grad2[i, j, k, l]:     d^2 T_ij / d r_{A,k} d r_{B,l}.

Everything is real; units nm^-3 (nm^-4, nm^-5 for gradients).
"""

import numpy as np

from ..constants import FOUR_PI

_EYE = np.eye(3)


class CoincidentAtomsError(ValueError):
    pass


def _f_tensor(v):
    """F_ij(v) = (delta_ij - 3 vhat vhat)/|v|^3."""
    s = np.linalg.norm(v)
    if s == 0:
        raise CoincidentAtomsError("propagator singular at zero separation")
    vh = v / s
    return (_EYE - 3.0 * np.outer(vh, vh)) / s**3


def _f_grad(v):
    """dF_ij/dv_k, shape (3, 3, 3) indexed [i, j, k]."""
    s = np.linalg.norm(v)
    if s == 0:
        raise CoincidentAtomsError("propagator singular at zero separation")
    d = _EYE
    g = (
        -3.0 * np.einsum("ij,k->ijk", d, v)
        - 3.0 * np.einsum("ik,j->ijk", d, v)
        - 3.0 * np.einsum("jk,i->ijk", d, v)
    ) / s**5
    g += 15.0 * np.einsum("i,j,k->ijk", v, v, v) / s**7
    return g


def _f_grad2(v):
    """d^2 F_ij / dv_k dv_l, shape (3, 3, 3, 3) indexed [i, j, k, l]."""
    s = np.linalg.norm(v)
    if s == 0:
        raise CoincidentAtomsError("propagator singular at zero separation")
    d = _EYE
    out = (
        -3.0
        * (
            np.einsum("ij,kl->ijkl", d, d)
            + np.einsum("ik,jl->ijkl", d, d)
            + np.einsum("jk,il->ijkl", d, d)
        )
        / s**5
    )
    out += (
        15.0
        * (
            np.einsum("ij,k,l->ijkl", d, v, v)
            + np.einsum("ik,j,l->ijkl", d, v, v)
            + np.einsum("jk,i,l->ijkl", d, v, v)
            + np.einsum("kl,i,j->ijkl", d, v, v)
            + np.einsum("il,j,k->ijkl", d, v, v)
            + np.einsum("jl,i,k->ijkl", d, v, v)
        )
        / s**7
    )
    out -= 105.0 * np.einsum("i,j,k,l->ijkl", v, v, v, v) / s**9
    return out


def t0_points(pos_a, pos_b):
    return -_f_tensor(np.asarray(pos_a, float) - np.asarray(pos_b, float)) / FOUR_PI


def t0(geometry):
    """Free-space propagator; symmetric and traceless."""
    return t0_points(geometry.pos_a, geometry.pos_b)


def grad_t0(geometry, which="B"):
    """Gradient of T0 with respect to one atom's position."""
    v = geometry.pos_a - geometry.pos_b
    sign = 1.0 if which.upper() == "A" else -1.0
    return -sign * _f_grad(v) / FOUR_PI


def grad2_t0(geometry):
    """Mixed second gradient d^2 T0 / d r_A d r_B."""
    v = geometry.pos_a - geometry.pos_b
    # d/dB = -d/dv, d/dA = +d/dv
    return +_f_grad2(v) / FOUR_PI
