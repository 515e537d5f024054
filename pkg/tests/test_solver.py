"""PT2, diagonalization tracking, hybrid embedding and the C6 fit."""

import math

import numpy as np
import pytest

from rydfibre.atomic import AtomState, RadialSolver, load_defects
from rydfibre.pairs import (
    BasisWindow,
    ChannelFilter,
    PairBasis,
    PairState,
    assemble,
    build_basis,
)
from rydfibre.propagators import Medium, PairGeometry
from rydfibre.solver import (
    NoAsymptoteError,
    QuasiResonanceError,
    TrackingError,
    diagonalize,
    diagonalize_track,
    fit_c6,
    hybrid,
    pt2,
    quad_contribution,
)

DEFECTS = load_defects()
SOLVER = RadialSolver(DEFECTS)
MED = Medium(3.9)


def S(n, mj=0.5):
    return AtomState.make(n, 0, 0.5, mj)


def P32(n, mj=0.5):
    return AtomState.make(n, 1, 1.5, mj)


def vacuum(dz):
    return PairGeometry.lateral(0.0, 1.0, dz)


@pytest.fixture(scope="module")
def basis_30s():
    return build_basis(S(30), S(30), BasisWindow(), defects=DEFECTS)


@pytest.fixture(scope="module")
def small_basis():
    """First 12 states of a truncated basis, for the brute-force oracle."""
    full = build_basis(
        S(30), S(30), BasisWindow(n_half_width=1, energy_cutoff_ghz=120.0),
        defects=DEFECTS, include_manifold=False,
    )
    states = full.states[:12]
    return PairBasis(states, 1, full.window, False)


# ------------------------------------------------------------ PT2 oracle


def test_pt2_equals_brute_force_sum(small_basis):
    """PT2 must equal an independent second-order sum assembled from the
    full interaction matrix: U = sum_p |<p|H|0>|^2 / delta_p."""
    for medium, surface in [(None, "vacuum"), (MED, "halfspace")]:
        g = PairGeometry.lateral(200.0, 260.0, 520.0)
        res = pt2(small_basis, SOLVER, g, medium, surface, with_manifold=False)
        h = assemble(small_basis, SOLVER, g, medium, surface)
        brute = sum(
            abs(h[0, p]) ** 2 / small_basis.states[p].delta_ghz
            for p in range(1, len(small_basis))
        )
        assert res.u_total_ghz == pytest.approx(brute, rel=1e-12)


def test_pt2_decomposition_closure(basis_30s):
    g = PairGeometry.lateral(200.0, 250.0, 620.0)
    res = pt2(basis_30s, SOLVER, g, MED, "cylinder")
    total = res.u_free_ghz + res.u_cross_ghz + res.u_fibre_ghz
    assert total == pytest.approx(res.u_total_ghz, rel=1e-10)
    assert res.u_fibre_ghz > 0.0
    assert res.u_free_ghz > 0.0


def test_pt2_channel_sum_closure(basis_30s):
    g = PairGeometry.lateral(200.0, 250.0, 620.0)
    res = pt2(basis_30s, SOLVER, g, MED, "halfspace")
    assert sum(res.channels_ghz.values()) == pytest.approx(
        res.u_total_ghz, rel=1e-10
    )


def test_pt2_vacuum_decomposition_trivial(basis_30s):
    res = pt2(basis_30s, SOLVER, vacuum(900.0))
    assert res.u_cross_ghz == 0.0 and res.u_fibre_ghz == 0.0
    assert res.u_total_ghz == pytest.approx(res.u_free_ghz, rel=1e-14)
    # repulsive potential, C6 < 0 in the U = -C6/r^6 convention
    assert res.u_total_ghz > 0.0


def test_pt2_sigma_channels_vanish_in_vacuum(basis_30s):
    res = pt2(basis_30s, SOLVER, vacuum(700.0))
    assert res.channels_ghz["pi-sigma"] == 0.0
    assert res.channels_ghz["sigma-sigma-same"] == 0.0
    assert res.channels_ghz["pi-pi"] > 0.0
    assert res.channels_ghz["sigma-sigma-opposite"] > 0.0


def test_pt2_manifold_time_reversal(basis_30s):
    res = pt2(basis_30s, SOLVER, vacuum(1500.0))
    pm = res.manifold.per_member_ghz
    # members ordered (+,+), (+,-), (-,+), (-,-)
    assert pm[0] == pytest.approx(pm[3], rel=1e-12)
    assert pm[1] == pytest.approx(pm[2], rel=1e-12)
    # M_J dependence is weak but finite (distinct fine-structure channels)
    assert res.manifold.spread_rel < 0.02


def test_quasi_resonance_guard():
    basis = build_basis(P32(38, 1.5), P32(38, 1.5), BasisWindow(), defects=DEFECTS)
    with pytest.raises(QuasiResonanceError) as err:
        pt2(basis, SOLVER, vacuum(900.0))
    pair = err.value.pair
    assert abs(pair.delta_ghz) < 0.5


# -------------------------------------------------------- diagonalization


def test_diag_two_level_closed_form():
    for delta, v in [(10.0, 0.4), (5.0, 2.0), (-8.0, 0.7)]:
        h = np.array([[0.0, v], [v, delta]], dtype=complex)
        shift, per_member, _ = diagonalize_track(h, [0])
        exact = 0.5 * (delta - math.copysign(math.sqrt(delta**2 + 4 * v**2), delta))
        assert shift == pytest.approx(exact, rel=1e-12)
        # PT2 limit -v^2/delta to O(v^4)
        if abs(v / delta) < 0.1:
            assert shift == pytest.approx(-v**2 / delta, rel=5e-3)


def test_diag_zero_coupling_zero_shift(small_basis):
    h = np.diag([0.0] + [-p.delta_ghz for p in small_basis.states[1:]]).astype(complex)
    shift, _, _ = diagonalize_track(h, [0])
    assert shift == 0.0


def test_diag_tracking_error():
    h = np.array([[0.0, 5.0], [5.0, 0.1]], dtype=complex)
    with pytest.raises(TrackingError):
        diagonalize_track(h, [0])


def test_diag_lambda_scaling_converges_to_pt2(small_basis):
    """shift(lambda)/lambda^2 -> PT2 as the couplings are scaled down."""
    g = PairGeometry.lateral(200.0, 260.0, 520.0)
    res = pt2(small_basis, SOLVER, g, MED, "halfspace", with_manifold=False)
    h = assemble(small_basis, SOLVER, g, MED, "halfspace")
    diag = np.diag(np.diag(h))
    off = h - diag
    errs = []
    for lam in (1e-2, 1e-3):
        shift, _, _ = diagonalize_track(diag + lam * off, [0])
        errs.append(abs(shift / lam**2 - res.u_total_ghz) / abs(res.u_total_ghz))
    assert errs[0] < 1e-3
    assert errs[1] < 1e-5
    assert errs[1] < errs[0]


def test_pt2_vs_diag_far_apart(basis_30s):
    res_p = pt2(basis_30s, SOLVER, vacuum(1100.0))
    res_d = hybrid(basis_30s, SOLVER, vacuum(1100.0), diag_window_ghz=120.0)
    assert res_d.u_total_ghz == pytest.approx(res_p.u_total_ghz, rel=0.02)


def test_hybrid_matches_full_diag():
    basis = build_basis(
        S(30), S(30), BasisWindow(n_half_width=4, energy_cutoff_ghz=200.0),
        defects=DEFECTS,
    )
    g = vacuum(1000.0)
    full = diagonalize(basis, SOLVER, g)
    emb = hybrid(basis, SOLVER, g, diag_window_ghz=60.0)
    assert emb.u_total_ghz == pytest.approx(full.u_total_ghz, rel=1e-5)


def test_hybrid_matches_full_diag_near_fibre():
    basis = build_basis(
        S(30), S(30), BasisWindow(n_half_width=4, energy_cutoff_ghz=200.0),
        defects=DEFECTS,
    )
    g = PairGeometry.lateral(200.0, 250.0, 800.0)
    full = diagonalize(basis, SOLVER, g, MED, "halfspace")
    emb = hybrid(basis, SOLVER, g, MED, "halfspace", diag_window_ghz=60.0)
    assert emb.u_total_ghz == pytest.approx(full.u_total_ghz, rel=1e-5)


# ----------------------------------------------------------------- C6 fit


def test_fit_c6_exact_power_law():
    r = np.linspace(0.5, 3.0, 40)
    c = 0.026
    fit = fit_c6(r, c / r**6)
    assert fit.c6_ghz_um6 == pytest.approx(-c, rel=1e-12)
    assert fit.residual < 1e-12
    assert fit.r_vdw_um == pytest.approx(r[0])


def test_fit_c6_no_asymptote():
    r = np.linspace(0.5, 3.0, 30)
    with pytest.raises(NoAsymptoteError):
        fit_c6(r, 1.0 / r**3)


def test_fit_c6_needs_enough_points():
    with pytest.raises(NoAsymptoteError):
        fit_c6([1.0, 2.0, 3.0], [1.0, 0.5, 0.3])


def test_fit_c6_finds_breakdown_radius():
    r = np.linspace(0.3, 3.0, 80)
    u = 0.026 / r**6 * (1.0 + np.where(r < 1.0, 0.4 * (1.0 - r) ** 2, 0.0))
    fit = fit_c6(r, u)
    assert fit.c6_ghz_um6 == pytest.approx(-0.026, rel=1e-6)
    # 5% deviation of U r^6 happens at 0.4 (1-r)^2 = 0.05 -> r ~ 0.65
    assert 0.55 < fit.r_vdw_um < 0.75


# ------------------------------------------------------------- quadrupole


@pytest.fixture(scope="module")
def basis_30s_quad():
    return build_basis(
        S(30), S(30), BasisWindow(n_half_width=6, energy_cutoff_ghz=300.0),
        quad_enabled=True, defects=DEFECTS,
    )


def test_quad_contribution_zero_when_disabled(basis_30s_quad):
    g = vacuum(900.0)
    flt = ChannelFilter.dipole_only()
    full = pt2(basis_30s_quad, SOLVER, g, filt=flt)
    dip = pt2(basis_30s_quad, SOLVER, g, filt=ChannelFilter.dipole_only())
    assert full.u_total_ghz == dip.u_total_ghz


def test_quad_contribution_small_far_out(basis_30s_quad):
    g = vacuum(900.0)
    dq = quad_contribution(basis_30s_quad, SOLVER, g, mode="pt2")
    u = pt2(basis_30s_quad, SOLVER, g).u_total_ghz
    assert dq != 0.0
    assert abs(dq / u) < 0.05


def test_quad_contribution_p_state_subdominant():
    basis = build_basis(
        P32(30, 1.5), P32(30, 1.5),
        BasisWindow(n_half_width=5, energy_cutoff_ghz=250.0),
        quad_enabled=True, defects=DEFECTS,
    )
    g = vacuum(500.0)
    dq = quad_contribution(basis, SOLVER, g, mode="pt2")
    u = pt2(basis, SOLVER, g).u_total_ghz
    assert dq != 0.0
    assert abs(dq) < abs(u)
