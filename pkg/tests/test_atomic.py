"""Level energies, radial integrals and multipole matrix elements."""

import math

import numpy as np
import pytest

from rydfibre.atomic import (
    AtomState,
    ForbiddenTransitionError,
    InvalidStateError,
    MissingSeriesError,
    QuantumDefectTable,
    RadialSolver,
    dipole_vector,
    hydrogen_table,
    load_defects,
    quadrupole_tensor,
    rotation_matrix,
)


@pytest.fixture(scope="module")
def defects():
    return load_defects()


@pytest.fixture(scope="module")
def solver(defects):
    return RadialSolver(defects)


def S(n, mj=0.5):
    return AtomState.make(n, 0, 0.5, mj)


def P32(n, mj=0.5):
    return AtomState.make(n, 1, 1.5, mj)


# ---------------------------------------------------------------- states


def test_state_validation():
    with pytest.raises(InvalidStateError):
        AtomState.make(4, 0, 0.5, 0.5)
    with pytest.raises(InvalidStateError):
        AtomState.make(30, 0, 1.5, 0.5)
    with pytest.raises(InvalidStateError):
        AtomState.make(30, 1, 1.5, 2.5)
    s = AtomState.make(30, 2, 2.5, -1.5)
    assert s.two_j == 5 and s.two_mj == -3


# ---------------------------------------------------------------- energy


def test_hydrogenic_limit():
    table = hydrogen_table(rydberg_ghz=1.0)
    # delta0 = delta2 = 0, n = 2 -> E = -Ry/4 (state class needs n >= 5,
    # so check through the table directly)
    assert table.defect(2, 0, 1) == 0.0
    assert -1.0 / table.n_star(2, 0, 1) ** 2 == pytest.approx(-0.25)


def test_energy_monotone_in_n(defects):
    for l, two_j in [(0, 1), (1, 3), (2, 5)]:
        energies = [
            defects.energy_ghz(AtomState(n, l, two_j, 1)) for n in range(20, 61)
        ]
        assert all(e2 > e1 for e1, e2 in zip(energies, energies[1:]))


def test_missing_series(defects):
    with pytest.raises(MissingSeriesError):
        defects.defect(30, 0, 3)  # no L=0, J=3/2 series
    # L >= 5 falls back to hydrogenic
    assert defects.defect(30, 5, 11) == 0.0


def test_forster_defect_ratio(defects):
    # 2E(30P3/2) - E(30S) - E(31S) should be ~ 1/35 of the free-space
    # channel defect 2E(30P3/2) - E(30S) - E(29D5/2)
    e_p = defects.energy_ghz(P32(30))
    d2 = 2 * e_p - defects.energy_ghz(S(30)) - defects.energy_ghz(S(31))
    d1 = (
        2 * e_p
        - defects.energy_ghz(S(30))
        - defects.energy_ghz(AtomState.make(29, 2, 2.5, 0.5))
    )
    assert d1 / d2 == pytest.approx(35.0, rel=0.10)


# ---------------------------------------------------------------- radial


def test_hydrogen_2p_1s_oracle():
    """Inward Numerov vs the closed-form hydrogen integral.

    R_10 = 2 e^-r, R_21 = r e^(-r/2)/sqrt(24):
    <2p|r|1s> = (2/sqrt(24)) int r^4 e^(-3r/2) dr = (2/sqrt(24)) 4! (2/3)^5.
    """
    oracle = 2.0 / math.sqrt(24.0) * math.factorial(4) * (2.0 / 3.0) ** 5
    solver = RadialSolver(hydrogen_table(), dx=1e-3, r_min_au=1e-3)
    value = solver.radial_integral_raw((1, 0, 1), (2, 1, 1), power=1)
    assert abs(value) == pytest.approx(oracle, rel=1e-3)
    assert oracle == pytest.approx(1.2902, abs=2e-4)


def test_hydrogen_same_n_closed_form():
    # <n, l+1 | r | n, l> = (3/2) n sqrt(n^2 - (l+1)^2) for hydrogen
    solver = RadialSolver(hydrogen_table(), dx=1e-3)
    for n, l in [(5, 0), (8, 2), (12, 1)]:
        got = solver.radial_integral_raw((n, l, 2 * l + 1), (n, l + 1, 2 * l + 3))
        ref = 1.5 * n * math.sqrt(n * n - (l + 1) ** 2)
        assert abs(got) == pytest.approx(ref, rel=1e-3)


def test_normalization(solver):
    for n, l, two_j in [(30, 0, 1), (30, 1, 3), (45, 2, 5), (35, 3, 7)]:
        assert solver.norm_check(n, l, two_j) == pytest.approx(1.0, abs=1e-6)


def test_radial_symmetry(solver):
    a, b = S(30), P32(31)
    assert solver.radial_integral(a, b) == solver.radial_integral(b, a)


def test_rb_dipole_magnitude(solver):
    # near-diagonal nS-nP radial integrals scale like n*^2; the 30S-30P3/2
    # integral is a standard benchmark at ~ 845 a.u.
    val = abs(solver.radial_integral(S(30), P32(30)))
    nstar2 = solver.defects.n_star(30, 0, 1) ** 2
    assert 0.8 * nstar2 < val < 1.5 * nstar2


# -------------------------------------------------------------- multipole


def test_dipole_sigma_plus_axis_z(solver):
    # sigma+ transition, axis along z: direction (-1, +i, 0)/sqrt(2)
    a = S(30, mj=0.5)
    b = P32(30, mj=1.5)
    v = dipole_vector(solver, a, b, axis=(0.0, 0.0))
    direction = v / np.linalg.norm(v) * math.sqrt(2)
    phase = direction[0] / -1.0
    np.testing.assert_allclose(
        direction / phase, [-1.0, 1.0j, 0.0], atol=1e-12
    )


def test_dipole_sigma_plus_general_axis(solver):
    # lab components follow the rotated sigma+ polarization column
    a = S(30, mj=0.5)
    b = P32(30, mj=1.5)
    theta, phi = 0.7, 1.9
    v = dipole_vector(solver, a, b, axis=(theta, phi))
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    expected_dir = np.array(
        [-ct * cp - 1j * sp, -ct * sp + 1j * cp, st]
    ) / math.sqrt(2)
    amp = v[2] / expected_dir[2]
    np.testing.assert_allclose(v, amp * expected_dir, atol=1e-12)


def test_dipole_pi_along_axis(solver):
    a = S(30, mj=0.5)
    b = P32(30, mj=0.5)
    v = dipole_vector(solver, a, b, axis=(0.0, 0.0))
    assert abs(v[0]) < 1e-14 and abs(v[1]) < 1e-14 and abs(v[2]) > 1.0


def test_dipole_norm_rotation_invariant(solver):
    a = S(30, mj=0.5)
    b = P32(30, mj=1.5)
    n0 = np.linalg.norm(dipole_vector(solver, a, b, axis=(0.0, 0.0)))
    for theta, phi in [(0.3, 0.0), (1.2, 2.2), (math.pi / 2, 0.5), (2.8, 4.4)]:
        n1 = np.linalg.norm(dipole_vector(solver, a, b, axis=(theta, phi)))
        assert n1 == pytest.approx(n0, rel=1e-12)


def test_dipole_reduced_element_consistency(solver):
    """All (M, q) components of one fine-structure line reproduce the same
    reduced matrix element when divided by their angular factor."""
    from rydfibre.angular import clebsch_gordan

    a_l, a2j = 0, 1
    b_l, b2j = 1, 3
    ratios = []
    for two_mj_a in (-1, 1):
        for q2 in (-2, 0, 2):
            two_mj_b = two_mj_a + q2
            if abs(two_mj_b) > b2j:
                continue
            a = AtomState(30, a_l, a2j, two_mj_a)
            b = AtomState(30, b_l, b2j, two_mj_b)
            v = dipole_vector(solver, a, b)
            amp = np.linalg.norm(v)
            cg = clebsch_gordan(a2j, two_mj_a, 2, q2, b2j, two_mj_b)
            if abs(cg) > 1e-14:
                ratios.append(amp / abs(cg))
    assert len(ratios) >= 4
    assert max(ratios) - min(ratios) < 1e-12 * max(ratios)


def test_dipole_forbidden(solver):
    with pytest.raises(ForbiddenTransitionError):
        dipole_vector(solver, S(30), AtomState.make(30, 2, 2.5, 0.5))


def test_quadrupole_symmetric(solver):
    a = S(30, mj=0.5)
    b = AtomState.make(30, 2, 2.5, 1.5)
    q = quadrupole_tensor(solver, a, b, axis=(0.4, 1.1))
    np.testing.assert_allclose(q, q.T, atol=1e-14)
    assert np.max(np.abs(q)) > 0


def test_quadrupole_parity_zero(solver):
    q = quadrupole_tensor(solver, S(30), P32(30))
    np.testing.assert_allclose(q, 0.0, atol=1e-15)


def test_quadrupole_out_of_reach(solver):
    with pytest.raises(ForbiddenTransitionError):
        quadrupole_tensor(solver, S(30), AtomState.make(30, 3, 3.5, 0.5))


def test_rotation_matrix_orthogonal():
    r = rotation_matrix(0.7, 2.1)
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(
        r @ [0, 0, 1],
        [math.sin(0.7) * math.cos(2.1), math.sin(0.7) * math.sin(2.1), math.cos(0.7)],
        atol=1e-14,
    )
