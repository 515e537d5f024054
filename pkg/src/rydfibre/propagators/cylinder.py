"""Scattered static propagator of a dielectric cylinder.

The electrostatic Green's function of a point charge outside a dielectric
cylinder of radius a (permittivity eps, vacuum outside) has the scattered
part

    G_sc(r, r') = (2/pi) sum_m int_0^inf dk cos(k (z - z'))
                  e^{i m (phi - phi')} A_m(k) K_m(k rho) K_m(k rho'),

    A_m(k) = (eps - 1) I_m(x) I'_m(x)
             / [ I_m(x) K'_m(x) - eps I'_m(x) K_m(x) ],   x = k a,

obtained by matching the potential and the normal displacement at
rho = a.  The reflected propagator follows from two gradients,

    T1_ij(r_A, r_B) = -(1/4pi) d^2 G_sc / d r_{A,i} d r_{B,j},

evaluated per azimuthal mode with analytic derivatives (Bessel
recurrences in rho, i m factors in phi, k factors in z) and a composite
Gauss-Legendre quadrature in k whose panels resolve both the kernel
decay exp(-k (X_A + X_B)) and the axial oscillation cos(k dz).
Exponentially scaled Bessel functions keep every factor representable
at large order and argument.

Gradients of T1 are central finite differences of this tensor with
Richardson extrapolation (the tensor itself is analytic in the atom
coordinates, so the extrapolation converges fast).

Index conventions as in `free`.
"""

import math

import numpy as np
from scipy.special import ive, kve

from ..constants import FOUR_PI
from .geometry import DEFAULT_QUAD, GeometryError
from .halfspace import AtomInsideMediumError

_MODE_CHUNK = 16
# consecutive negligible mode chunks required before the sum is declared
# converged (contributions can pass through zero with cos(m dphi))
_CALM_CHUNKS = 2


class QuadratureConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


def _rotation(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _k_grid(k_max, dz_abs, x_sum, nodes):
    """Composite Gauss-Legendre nodes/weights on (0, k_max]."""
    width = k_max / 4.0
    if dz_abs > 0:
        width = min(width, math.pi / (2.0 * dz_abs))
    if x_sum > 0:
        width = min(width, 1.5 / x_sum)
    n_panels = max(4, int(math.ceil(k_max / width)))
    edges = np.linspace(0.0, k_max, n_panels + 1)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    k = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return k, w


def _log_ive(orders, x):
    """log(I_m(x) e^-x), stable for all orders via a Debye fallback."""
    o, xx = np.broadcast_arrays(np.asarray(orders, float), np.asarray(x, float))
    with np.errstate(divide="ignore"):
        out = np.log(ive(o, xx))
    bad = ~np.isfinite(out)
    if np.any(bad):
        # only large orders underflow scipy's scaled I, safe for Debye forms
        out[bad] = _debye_log_i(np.abs(o[bad]), xx[bad]) - xx[bad]
    return out


def _log_kve(orders, x):
    """log(K_m(x) e^x), stable for all orders via a Debye fallback."""
    o, xx = np.broadcast_arrays(np.asarray(orders, float), np.asarray(x, float))
    with np.errstate(over="ignore"):
        out = np.log(kve(o, xx))
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _debye_log_k(np.abs(o[bad]), xx[bad]) + xx[bad]
    return out


def _debye_eta_t(nu, x):
    z = x / nu
    w = np.sqrt(1.0 + z * z)
    eta = w + np.log(z / (1.0 + w))
    t = 1.0 / w
    return eta, t, w


def _debye_log_i(nu, x):
    # DLMF 10.41.3 with two correction terms; used only deep in the
    # large-order regime where scipy's scaled I underflows
    eta, t, w = _debye_eta_t(nu, x)
    u1 = (3.0 * t - 5.0 * t**3) / 24.0
    u2 = (81.0 * t**2 - 462.0 * t**4 + 385.0 * t**6) / 1152.0
    return (
        nu * eta
        - 0.5 * np.log(2.0 * math.pi * nu)
        - 0.5 * np.log(w)
        + np.log1p(u1 / nu + u2 / nu**2)
    )


def _debye_log_k(nu, x):
    eta, t, w = _debye_eta_t(nu, x)
    u1 = (3.0 * t - 5.0 * t**3) / 24.0
    u2 = (81.0 * t**2 - 462.0 * t**4 + 385.0 * t**6) / 1152.0
    return (
        -nu * eta
        + 0.5 * np.log(math.pi / (2.0 * nu))
        - 0.5 * np.log(w)
        + np.log1p(-u1 / nu + u2 / nu**2)
    )


def _mode_block(ms, k, eps, a_nm, rho_a, rho_b):
    """Stable kernel pieces for a block of azimuthal orders.

    Returns (combo, ra, rb) with shapes (len(ms), len(k)):

    combo = A_m(k) K_m(k rho_A) K_m(k rho_B) exp(-k (X_A + X_B) ... full
            scattering weight with the surface-distance exponential folded
            in (finite for every m, k);
    ra    = k K'_m(k rho_A) / K_m(k rho_A), the radial-derivative ratio
            at atom A (rb likewise at B).

    Everything is assembled in log space so that no intermediate factor
    over- or underflows even for m in the thousands at small k.
    """
    orders = np.arange(ms[0] - 1, ms[-1] + 2)
    n_m = len(ms)
    xa = k * a_nm
    lie = _log_ive(orders[:, None], xa[None, :])
    lke = _log_kve(orders[:, None], xa[None, :])
    lka = _log_kve(orders[:, None], (k * rho_a)[None, :])
    lkb = _log_kve(orders[:, None], (k * rho_b)[None, :])

    sl = slice(1, 1 + n_m)
    ln2 = math.log(2.0)
    lie0 = lie[sl]
    lie1 = np.logaddexp(lie[:-2][:n_m], lie[2:][:n_m]) - ln2   # log(I'_m e^-x)
    lke0 = lke[sl]
    lke1 = np.logaddexp(lke[:-2][:n_m], lke[2:][:n_m]) - ln2   # log(|K'_m| e^x)
    lka0, lkb0 = lka[sl], lkb[sl]
    lka1 = np.logaddexp(lka[:-2][:n_m], lka[2:][:n_m]) - ln2
    lkb1 = np.logaddexp(lkb[:-2][:n_m], lkb[2:][:n_m]) - ln2

    # denominator I_m K'_m - eps I'_m K_m < 0; both addends negative-signed
    ldenom = np.logaddexp(lie0 + lke1, math.log(eps) + lie1 + lke0)
    x_sum = (rho_a - a_nm) + (rho_b - a_nm)
    combo = -(eps - 1.0) * np.exp(
        lie0 + lie1 - ldenom + lka0 + lkb0 - k[None, :] * x_sum
    )
    ra = -k[None, :] * np.exp(lka1 - lka0)
    rb = -k[None, :] * np.exp(lkb1 - lkb0)
    return combo, ra, rb


def _d_cyl(pos_a_cyl, pos_b_cyl, a_nm, eps, params, nodes):
    """Second-derivative matrix D[alpha, beta] of G_sc in the cylindrical
    direction bases at atoms A and B (alpha, beta in rho, phi-hat, z).

    Returns (D, converged_m, tail_ratio).
    """
    rho_a, phi_a, z_a = pos_a_cyl
    rho_b, phi_b, z_b = pos_b_cyl
    x_a, x_b = rho_a - a_nm, rho_b - a_nm
    zeta = z_a - z_b
    psi = phi_a - phi_b

    k_max = params.k_max_scale / min(x_a, x_b)
    k, w = _k_grid(k_max, abs(zeta), x_a + x_b, nodes)
    cz = np.cos(k * zeta)
    sz = np.sin(k * zeta)

    d = np.zeros((3, 3))
    total_norm = 0.0
    calm = 0
    m_done = 0
    for m_lo in range(0, params.m_max + 1, _MODE_CHUNK):
        ms = np.arange(m_lo, min(m_lo + _MODE_CHUNK, params.m_max + 1))
        combo, rat_a, rat_b = _mode_block(ms, k, eps, a_nm, rho_a, rho_b)
        base = combo * w  # (n_m, n_k)
        chunk = np.zeros((3, 3))
        for idx, m in enumerate(ms):
            bm = base[idx]
            # radial-derivative / azimuthal factors per direction, relative
            # to the K_m K_m weight already inside `combo`
            fa = (rat_a[idx], m / rho_a, 1.0)
            fb = (rat_b[idx], m / rho_b, 1.0)
            pha = (1.0, 1.0j, 1.0)
            phb = (1.0, -1.0j, 1.0)
            weight = 1.0 if m == 0 else 2.0
            phase = np.exp(1j * m * psi)
            dm = np.empty((3, 3))
            for ia in range(3):
                for ib in range(3):
                    za = ia == 2
                    zb = ib == 2
                    if za and zb:
                        zfac = k * k * cz
                    elif za:
                        zfac = -k * sz
                    elif zb:
                        zfac = k * sz
                    else:
                        zfac = cz
                    amp = (pha[ia] * phb[ib] * phase).real
                    dm[ia, ib] = amp * np.sum(bm * fa[ia] * fb[ib] * zfac)
            chunk += weight * dm
        d += chunk
        m_done = ms[-1]
        total_norm = max(total_norm, float(np.max(np.abs(d))))
        chunk_norm = float(np.max(np.abs(chunk)))
        if total_norm > 0 and chunk_norm < params.rel_tol * total_norm:
            calm += 1
            if calm >= _CALM_CHUNKS:
                break
        else:
            calm = 0
    tail = chunk_norm / total_norm if total_norm > 0 else 0.0
    return (2.0 / math.pi) * d, m_done, tail


def _cyl_coords(pos):
    x, y, z = pos
    return math.hypot(x, y), math.atan2(y, x), z


def t1_cylinder_points(pos_a, pos_b, a_nm, medium, params=DEFAULT_QUAD, with_info=False):
    """Reflected cylinder propagator between arbitrary Cartesian points.

    The k-grid residual is estimated by comparing two Gauss-Legendre node
    counts on the same panels; the m-sum tail from the last mode chunk.
    """
    pos_a = np.asarray(pos_a, float)
    pos_b = np.asarray(pos_b, float)
    ca = _cyl_coords(pos_a)
    cb = _cyl_coords(pos_b)
    if a_nm <= 0:
        raise GeometryError("cylinder needs a positive radius")
    if ca[0] <= a_nm or cb[0] <= a_nm:
        raise AtomInsideMediumError("both atoms must lie outside the cylinder")

    eps = medium.eps_static
    nodes = params.nodes_per_panel
    d_prev, m_used, tail = _d_cyl(ca, cb, a_nm, eps, params, nodes)
    residual = math.inf
    d_best = d_prev
    for _ in range(params.max_refinements + 1):
        nodes = nodes + max(6, nodes // 2)
        d_best, m_used, tail = _d_cyl(ca, cb, a_nm, eps, params, nodes)
        scale = max(float(np.max(np.abs(d_best))), 1e-250)
        residual = float(np.max(np.abs(d_best - d_prev)) / scale)
        if residual < params.rel_tol * 50.0:
            break
        d_prev = d_best
    else:
        raise QuadratureConvergenceError(
            "cylinder k-quadrature failed to converge", residual
        )
    if m_used >= params.m_max and tail > params.rel_tol * 10.0:
        raise QuadratureConvergenceError(
            "azimuthal mode sum truncated before convergence", tail
        )

    t = -np.asarray(_rotation(ca[1]) @ d_best @ _rotation(cb[1]).T) / FOUR_PI
    if with_info:
        return t, {"k_residual": residual, "m_used": int(m_used), "m_tail": tail,
                   "nodes_per_panel": nodes}
    return t


def t1_cylinder(geometry, medium, params=DEFAULT_QUAD):
    """Reflected propagator of the dielectric cylinder rho < a."""
    return t1_cylinder_points(
        geometry.pos_a, geometry.pos_b, geometry.a_nm, medium, params
    )


def grad_t1_cylinder(geometry, medium, which="B", params=DEFAULT_QUAD, h_nm=None):
    """Richardson-extrapolated central differences of t1_cylinder.

    grad[i, j, k] = d T1_ij / d r_{K,k}.
    """
    pos_a, pos_b = geometry.pos_a, geometry.pos_b
    a_nm = geometry.a_nm
    x_min = min(geometry.r_a_nm, geometry.r_b_nm) - a_nm
    if h_nm is None:
        h_nm = 0.05 * x_min

    moving = pos_a if which.upper() == "A" else pos_b
    fixed = pos_b if which.upper() == "A" else pos_a

    def tensor_at(p):
        if which.upper() == "A":
            return t1_cylinder_points(p, fixed, a_nm, medium, params)
        return t1_cylinder_points(fixed, p, a_nm, medium, params)

    def central(h):
        g = np.zeros((3, 3, 3))
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            g[:, :, axis] = (tensor_at(moving + e) - tensor_at(moving - e)) / (2 * h)
        return g

    residual = math.inf
    for _ in range(3):
        g_h = central(h_nm)
        g_h2 = central(h_nm / 2.0)
        extrap = (4.0 * g_h2 - g_h) / 3.0
        scale = max(np.max(np.abs(extrap)), 1e-300)
        residual = float(np.max(np.abs(extrap - g_h2)) / scale)
        if residual < 1e-4:
            return extrap
        h_nm /= 2.0
    raise QuadratureConvergenceError(
        "finite-difference gradient failed the extrapolation check", residual
    )


def grad2_t1_cylinder(geometry, medium, params=DEFAULT_QUAD, h_nm=None):
    """Mixed second gradient d^2 T1 / d r_A,k d r_B,l by nested central
    differences (no extrapolation; used only for quadrupole-quadrupole
    terms, which are small corrections)."""
    pos_a, pos_b = geometry.pos_a, geometry.pos_b
    a_nm = geometry.a_nm
    x_min = min(geometry.r_a_nm, geometry.r_b_nm) - a_nm
    if h_nm is None:
        h_nm = 0.05 * x_min

    out = np.zeros((3, 3, 3, 3))
    for ka in range(3):
        ea = np.zeros(3)
        ea[ka] = h_nm
        for lb in range(3):
            eb = np.zeros(3)
            eb[lb] = h_nm
            pp = t1_cylinder_points(pos_a + ea, pos_b + eb, a_nm, medium, params)
            pm = t1_cylinder_points(pos_a + ea, pos_b - eb, a_nm, medium, params)
            mp = t1_cylinder_points(pos_a - ea, pos_b + eb, a_nm, medium, params)
            mm = t1_cylinder_points(pos_a - ea, pos_b - eb, a_nm, medium, params)
            out[:, :, ka, lb] = (pp - pm - mp + mm) / (4.0 * h_nm**2)
    return out
