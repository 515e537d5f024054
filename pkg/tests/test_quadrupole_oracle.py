"""Quadrupole matrix elements against an explicit Clebsch-Gordan-sum oracle.

The oracle decomposes |n L J M> into |L M_L>|1/2 M_S> products with sympy
Clebsch-Gordan coefficients, writes each Cartesian product x_i x_j in the
spherical-harmonic basis by hand, and evaluates the orbital integrals with
sympy's Gaunt coefficients.  It shares no code with the production path.
"""

import math

import numpy as np
import pytest
from sympy import I, N, Rational, pi, sqrt
from sympy.physics.wigner import clebsch_gordan as scg
from sympy.physics.wigner import gaunt

from rydfibre.atomic import AtomState, RadialSolver, load_defects, quadrupole_tensor

HALF = Rational(1, 2)

# x_i x_j / r^2 expanded over Y_2m and Y_00 (complex spherical harmonics,
# Condon-Shortley phases).  Entries: {(l, m): coefficient}.
_C = {
    ("zz",): {(0, 0): 2 * sqrt(pi) / 3, (2, 0): 4 * sqrt(pi / 5) / 3},
    ("xx",): {
        (0, 0): 2 * sqrt(pi) / 3,
        (2, 0): -2 * sqrt(pi / 5) / 3,
        (2, 2): sqrt(2 * pi / 15),
        (2, -2): sqrt(2 * pi / 15),
    },
    ("yy",): {
        (0, 0): 2 * sqrt(pi) / 3,
        (2, 0): -2 * sqrt(pi / 5) / 3,
        (2, 2): -sqrt(2 * pi / 15),
        (2, -2): -sqrt(2 * pi / 15),
    },
    ("xy",): {(2, 2): -I * sqrt(2 * pi / 15), (2, -2): I * sqrt(2 * pi / 15)},
    ("xz",): {(2, 1): -sqrt(2 * pi / 15), (2, -1): sqrt(2 * pi / 15)},
    ("yz",): {(2, 1): I * sqrt(2 * pi / 15), (2, -1): I * sqrt(2 * pi / 15)},
}
_IJ = {
    (0, 0): "xx", (1, 1): "yy", (2, 2): "zz",
    (0, 1): "xy", (1, 0): "xy",
    (0, 2): "xz", (2, 0): "xz",
    (1, 2): "yz", (2, 1): "yz",
}


def _ylm_product_integral(l_bra, m_bra, l_mid, m_mid, l_ket, m_ket):
    """int conj(Y_l'm') Y_lm_mid Y_lm dOmega via Gaunt coefficients."""
    # conj(Y_lm) = (-1)^m Y_l,-m; gaunt() integrates a plain triple product
    return (-1) ** m_bra * gaunt(l_bra, l_mid, l_ket, -m_bra, m_mid, m_ket)


def _oracle_xixj(bra, ket):
    """<bra| x_i x_j / r^2 |ket> angular factor as a 3x3 sympy matrix."""
    out = np.zeros((3, 3), dtype=complex)
    terms = {}
    for (i, j), name in _IJ.items():
        table = _C[(name,)]
        val = 0
        for ml_ket in range(-ket.l, ket.l + 1):
            two_ms = ket.two_mj - 2 * ml_ket
            if abs(two_ms) != 1:
                continue
            cg_ket = scg(ket.l, HALF, Rational(ket.two_j, 2), ml_ket,
                         Rational(two_ms, 2), Rational(ket.two_mj, 2))
            ml_bra = None
            for ml_b in range(-bra.l, bra.l + 1):
                if 2 * ml_b + two_ms == bra.two_mj:
                    ml_bra = ml_b
            if ml_bra is None:
                continue
            cg_bra = scg(bra.l, HALF, Rational(bra.two_j, 2), ml_bra,
                         Rational(two_ms, 2), Rational(bra.two_mj, 2))
            if cg_ket == 0 or cg_bra == 0:
                continue
            for (lm, mm), coef in table.items():
                val += (
                    cg_bra * cg_ket * coef
                    * _ylm_product_integral(bra.l, ml_bra, lm, mm, ket.l, ml_ket)
                )
        terms[name] = complex(N(val))
        out[i, j] = terms[name]
    return out


CASES = [
    (AtomState.make(30, 0, 0.5, 0.5), AtomState.make(30, 2, 2.5, 0.5)),
    (AtomState.make(30, 0, 0.5, 0.5), AtomState.make(30, 2, 2.5, 2.5)),
    (AtomState.make(30, 0, 0.5, -0.5), AtomState.make(29, 2, 1.5, 1.5)),
    (AtomState.make(30, 1, 1.5, 1.5), AtomState.make(30, 1, 1.5, -0.5)),
    (AtomState.make(30, 1, 1.5, 0.5), AtomState.make(31, 3, 2.5, 0.5)),
    (AtomState.make(30, 1, 1.5, 1.5), AtomState.make(30, 1, 1.5, 1.5)),
    (AtomState.make(30, 2, 2.5, 2.5), AtomState.make(30, 2, 2.5, 2.5)),
]


@pytest.fixture(scope="module")
def solver():
    return RadialSolver(load_defects())


@pytest.mark.parametrize("ket,bra", CASES, ids=lambda s: str(s))
def test_quadrupole_vs_cg_oracle(solver, ket, bra):
    got = quadrupole_tensor(solver, ket, bra, axis=(0.0, 0.0))
    r2 = solver.radial_integral(ket, bra, power=2)
    want = -0.5 * r2 * _oracle_xixj(bra, ket)
    np.testing.assert_allclose(got, want, atol=1e-10 * max(abs(r2), 1.0))


def test_quadrupole_nonzero_s_to_d(solver):
    got = quadrupole_tensor(
        solver,
        AtomState.make(30, 0, 0.5, 0.5),
        AtomState.make(30, 2, 2.5, 0.5),
    )
    assert np.max(np.abs(got)) > 1.0  # a.u., large for Rydberg states


def test_quadrupole_rotation_consistency(solver):
    """Lab tensor for a rotated axis equals R Q_frame R^T."""
    from rydfibre.atomic.multipole import rotation_matrix

    ket = AtomState.make(30, 0, 0.5, 0.5)
    bra = AtomState.make(30, 2, 2.5, 1.5)
    q0 = quadrupole_tensor(solver, ket, bra, axis=(0.0, 0.0))
    theta, phi = 0.9, 2.3
    rot = rotation_matrix(theta, phi)
    q1 = quadrupole_tensor(solver, ket, bra, axis=(theta, phi))
    np.testing.assert_allclose(q1, rot @ q0 @ rot.T, atol=1e-12 * np.max(np.abs(q0)))
