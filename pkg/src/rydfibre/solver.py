"""Pair potentials: perturbation theory, diagonalization, C6 extraction.

Second-order perturbation theory uses the source convention
U_kl = |V_kl|^2 / delta_kl with delta_kl = (E_initial - E_pair)/h, so a
repulsive potential is positive.  With T = T0 + T1 every partial term
splits into the two-photon paths

    U_kl = |V0|^2/d + 2 Re(V0 conj(V1))/d + |V1|^2/d
           (free)     (vacuum-fibre cross)   (fibre-fibre)

whose sum closes exactly on the total.  Diagonalization tracks the
initial manifold through eigenvector overlaps; a hybrid mode
diagonalizes only the near-resonant block and adds the perturbative
tail, which is what parameter scans use by default.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .pairs import (
    ChannelFilter,
    channel_name,
    CHANNELS,
    FIBRE_ENABLED_CHANNELS,
    VACUUM_ALLOWED_CHANNELS,
    interaction_rows,
)
from .propagators import DEFAULT_QUAD


class QuasiResonanceError(RuntimeError):
    def __init__(self, pair, floor_ghz, admixture):
        super().__init__(
            f"perturbation theory invalid: |delta| = {abs(pair.delta_ghz):.4f} GHz "
            f"< {floor_ghz} GHz with admixture |V/delta| = {admixture:.2e} "
            f"for coupled pair {pair}"
        )
        self.pair = pair
        self.admixture = admixture


class TrackingError(RuntimeError):
    pass


class NoAsymptoteError(RuntimeError):
    pass


@dataclass
class ManifoldReport:
    per_member_ghz: list
    eigenvalues_ghz: list
    spread_rel: float


@dataclass
class PotentialBreakdown:
    u_total_ghz: float
    u_free_ghz: float = 0.0
    u_cross_ghz: float = 0.0
    u_fibre_ghz: float = 0.0
    channels_ghz: dict = field(default_factory=dict)
    top_pairs: list = field(default_factory=list)
    manifold: ManifoldReport | None = None
    mode: str = "pt2"
    meta: dict = field(default_factory=dict)

    def as_record(self):
        rec = {
            "mode": self.mode,
            "u_total_ghz": self.u_total_ghz,
            "decomposition": {
                "free": self.u_free_ghz,
                "vac_fib": self.u_cross_ghz,
                "fib_fib": self.u_fibre_ghz,
            },
            "channels_ghz": dict(self.channels_ghz),
            "meta": dict(self.meta),
        }
        if self.manifold is not None:
            rec["manifold"] = {
                "per_member_ghz": list(self.manifold.per_member_ghz),
                "spread_rel": self.manifold.spread_rel,
            }
        return rec


def _pair_channel(tracked, pair):
    dm_a = (pair.a.two_mj - tracked.a.two_mj) // 2
    dm_b = (pair.b.two_mj - tracked.b.two_mj) // 2
    from .atomic import dipole_allowed

    if (
        abs(dm_a) <= 1
        and abs(dm_b) <= 1
        and dipole_allowed(tracked.a, pair.a)
        and dipole_allowed(tracked.b, pair.b)
    ):
        return channel_name(dm_a, dm_b)
    return "multipole"


def pt2(basis, solver, geometry, medium=None, surface="vacuum", filt=None,
        params=DEFAULT_QUAD, member=0, quasi_resonance_floor_ghz=0.5,
        admixture_tol=1e-3, top_k=8, with_manifold=True):
    """Second-order potential with photon-path and channel decomposition.

    The quasi-resonance guard rejects the computation when a coupled pair
    sits below the detuning floor *and* actually mixes (|V/delta| above
    admixture_tol); accidentally near-degenerate pairs with negligible
    coupling do not invalidate perturbation theory.
    """
    filt = filt or ChannelFilter()
    tables = basis.tables(solver, geometry.axis)
    man = basis.manifold_indices
    rows = man if with_manifold else [member]
    v0, v1 = interaction_rows(basis, tables, geometry, medium, surface, filt, params)
    v0 = v0 if with_manifold else v0[[member]]
    v1 = v1 if with_manifold else v1[[member]]
    row_of = {m: i for i, m in enumerate(rows)}
    r = row_of[member]

    deltas = tables.deltas
    vtot = v0 + v1
    coupled = np.abs(vtot[r]) > 0
    coupled[man] = False
    near = coupled & (np.abs(deltas) < quasi_resonance_floor_ghz)
    if np.any(near):
        admix = np.zeros(len(deltas))
        admix[near] = np.abs(vtot[r][near]) / np.abs(deltas[near])
        worst = int(np.argmax(admix))
        if admix[worst] > admixture_tol:
            raise QuasiResonanceError(
                basis.states[worst], quasi_resonance_floor_ghz, float(admix[worst])
            )

    inv = np.zeros_like(deltas)
    use = np.ones(len(basis), dtype=bool)
    use[man] = False
    inv[use] = 1.0 / deltas[use]

    u_free = float(np.sum(np.abs(v0[r]) ** 2 * inv))
    u_cross = float(np.sum(2.0 * np.real(v0[r] * np.conj(v1[r])) * inv))
    u_fibre = float(np.sum(np.abs(v1[r]) ** 2 * inv))
    u_kl = np.abs(vtot[r]) ** 2 * inv
    u_total = float(np.sum(u_kl))

    channels = {name: 0.0 for name in CHANNELS}
    channels["multipole"] = 0.0
    tracked = basis.states[member]
    for idx in np.nonzero(u_kl)[0]:
        channels[_pair_channel(tracked, basis.states[idx])] += float(u_kl[idx])

    order = np.argsort(-np.abs(u_kl))[:top_k]
    top = [(basis.states[int(i)], float(u_kl[int(i)])) for i in order if u_kl[i] != 0.0]

    manifold_report = None
    if with_manifold and len(rows) > 1:
        w = (vtot * inv) @ np.conj(vtot).T
        w = 0.5 * (w + np.conj(w).T)
        eigs = np.linalg.eigvalsh(w)
        per_member = np.real(np.diag(w))
        scale = max(np.max(np.abs(per_member)), 1e-300)
        manifold_report = ManifoldReport(
            per_member_ghz=list(per_member),
            eigenvalues_ghz=list(eigs),
            spread_rel=float((per_member.max() - per_member.min()) / scale),
        )

    return PotentialBreakdown(
        u_total_ghz=u_total,
        u_free_ghz=u_free,
        u_cross_ghz=u_cross,
        u_fibre_ghz=u_fibre,
        channels_ghz=channels,
        top_pairs=top,
        manifold=manifold_report,
        mode="pt2",
        meta={"basis_size": len(basis), "surface": surface},
    )


def diagonalize_track(h, manifold_indices, overlap_floor=0.5):
    """Energy shift of the initial manifold from a dense eigendecomposition.

    Returns (shift, per_member, info): `shift` is the overlap-weighted mean
    over the manifold-selected eigenstates; per_member[i] tracks each
    member to its maximum-overlap eigenvector.  Deterministic under
    eigenvector phase changes (only |v|^2 enters).
    """
    manifold_indices = list(manifold_indices)
    energies, vectors = np.linalg.eigh(h)
    weight = np.abs(vectors[manifold_indices, :]) ** 2  # (m, n_eig)
    total = weight.sum(axis=0)
    m = len(manifold_indices)
    sel = np.argsort(-total)[:m]
    if total[sel[0]] < overlap_floor:
        raise TrackingError(
            f"initial manifold too strongly mixed: best overlap {total[sel[0]]:.3f}"
        )
    shift = float(np.sum(total[sel] * energies[sel]) / np.sum(total[sel]))
    per_member = []
    for i in range(m):
        j = int(np.argmax(weight[i]))
        per_member.append((float(energies[j]), float(weight[i, j])))
    return shift, per_member, {"overlaps": total[sel].tolist()}


def diagonalize(basis, solver, geometry, medium=None, surface="vacuum", filt=None,
                params=DEFAULT_QUAD, member=0, max_dim=6000, overlap_floor=0.5):
    """Potential from full dense diagonalization with manifold tracking."""
    from .pairs import assemble

    h = assemble(basis, solver, geometry, medium, surface, filt, params, max_dim)
    man = basis.manifold_indices
    shift, per_member, info = diagonalize_track(h, man, overlap_floor)
    tracked_shift, tracked_overlap = per_member[member]
    scale = max(max(abs(s) for s, _ in per_member), 1e-300)
    spread = (max(s for s, _ in per_member) - min(s for s, _ in per_member)) / scale
    return PotentialBreakdown(
        u_total_ghz=tracked_shift,
        manifold=ManifoldReport(
            per_member_ghz=[s for s, _ in per_member],
            eigenvalues_ghz=[],
            spread_rel=float(spread),
        ),
        mode="diag",
        meta={
            "basis_size": len(basis),
            "surface": surface,
            "overlap": tracked_overlap,
            "mean_shift_ghz": shift,
        },
    )


def hybrid(basis, solver, geometry, medium=None, surface="vacuum", filt=None,
           params=DEFAULT_QUAD, member=0, diag_window_ghz=80.0, max_dim=6000,
           overlap_floor=0.5, top_k=8):
    """Diagonalize the near-resonant block, treat the far tail perturbatively.

    Exact where the far channels are perturbative (|delta| > diag window
    much larger than their couplings), which holds for every scan geometry
    here; cross-validated against full diagonalization in the tests.
    """
    from .pairs import assemble

    filt = filt or ChannelFilter()
    tables = basis.tables(solver, geometry.axis)
    man = basis.manifold_indices
    near = np.abs(tables.deltas) <= diag_window_ghz
    near[man] = True
    idx = np.nonzero(near)[0]

    sub = _Subbasis(basis, idx)
    h = assemble(sub, solver, geometry, medium, surface, filt, params, max_dim)
    sub_man = [int(np.nonzero(idx == m)[0][0]) for m in man]
    shift, per_member, info = diagonalize_track(h, sub_man, overlap_floor)
    tracked_shift, tracked_overlap = per_member[member]

    # perturbative tail over the complement
    v0, v1 = interaction_rows(basis, tables, geometry, medium, surface, filt, params)
    vtot = (v0 + v1)[man.index(member) if isinstance(man, list) else member]
    far = ~near
    u_tail = float(np.sum(np.abs(vtot[far]) ** 2 / tables.deltas[far]))

    scale = max(max(abs(s) for s, _ in per_member), 1e-300)
    spread = (max(s for s, _ in per_member) - min(s for s, _ in per_member)) / scale
    return PotentialBreakdown(
        u_total_ghz=tracked_shift + u_tail,
        manifold=ManifoldReport(
            per_member_ghz=[s + u_tail for s, _ in per_member],
            eigenvalues_ghz=[],
            spread_rel=float(spread),
        ),
        mode="hybrid",
        meta={
            "basis_size": len(basis),
            "diag_block": int(len(idx)),
            "tail_ghz": u_tail,
            "surface": surface,
            "overlap": tracked_overlap,
        },
    )


class _Subbasis:
    """Restriction of a PairBasis to a subset of indices (diag block)."""

    def __init__(self, parent, indices):
        self.states = [parent.states[int(i)] for i in indices]
        self.window = parent.window
        self.quad_enabled = parent.quad_enabled
        self.manifold_size = parent.manifold_size
        self._parent = parent
        self._indices = np.asarray(indices)
        self._tables = {}

    @property
    def manifold_indices(self):
        return list(range(self.manifold_size))

    def __len__(self):
        return len(self.states)

    def tables(self, solver, axis):
        key = (id(solver), float(axis[0]), float(axis[1]))
        if key not in self._tables:
            parent_tables = self._parent.tables(solver, axis)
            self._tables[key] = _SubTables(parent_tables, self._indices)
        return self._tables[key]


class _SubTables:
    def __init__(self, parent, indices):
        self.axis = parent.axis
        self.ia = parent.ia[indices]
        self.ib = parent.ib[indices]
        self.deltas = parent.deltas[indices]
        self.two_mj_a = parent.two_mj_a
        self.two_mj_b = parent.two_mj_b
        self.d_a, self.d_b = parent.d_a, parent.d_b
        self.q_a, self.q_b = parent.q_a, parent.q_b


def solve(basis, solver, geometry, mode="pt2", **kwargs):
    """Dispatch to pt2 / diag / hybrid by name."""
    if mode == "pt2":
        return pt2(basis, solver, geometry, **kwargs)
    if mode == "diag":
        return diagonalize(basis, solver, geometry, **kwargs)
    if mode == "hybrid":
        return hybrid(basis, solver, geometry, **kwargs)
    raise ValueError(f"unknown solver mode {mode!r}")


# ------------------------------------------------------------------ C6 fit


@dataclass
class C6Fit:
    c6_ghz_um6: float
    r_vdw_um: float
    residual: float
    window: tuple

    @property
    def c6_magnitude_mhz_um6(self):
        return abs(self.c6_ghz_um6) * 1e3


def fit_c6(r_um, u_ghz, slope_tol=0.2, deviation_tol=0.05):
    """Fit U = -C6/r^6 on the asymptotic tail of a radial scan.

    The asymptotic window is the largest suffix where the local log-log
    slope is -6 +- slope_tol; C6 is the equal-weight mean of -U r^6 over
    the last fifth of that window, and R_vdW is the smallest sample from
    which |U r^6 / (-C6) - 1| stays below deviation_tol through the end.
    """
    r = np.asarray(r_um, dtype=float)
    u = np.asarray(u_ghz, dtype=float)
    if len(r) < 4:
        raise NoAsymptoteError("need at least 4 samples")
    if np.any(np.diff(r) <= 0):
        raise ValueError("radii must be strictly increasing")
    if np.any(u == 0):
        raise NoAsymptoteError("potential vanishes inside the scan")

    y = u * r**6
    logr, logu = np.log(r), np.log(np.abs(u))
    slope = np.gradient(logu, logr)
    ok = np.abs(slope + 6.0) <= slope_tol
    start = len(r)
    for i in range(len(r) - 1, -1, -1):
        if ok[i]:
            start = i
        else:
            break
    if start >= len(r) - 2:
        raise NoAsymptoteError("no suffix with log-log slope -6")

    tail = max(3, (len(r) - start) // 5)
    c6 = -float(np.mean(y[-tail:]))
    residual = float(np.max(np.abs(y[-tail:] / (-c6) - 1.0)))

    dev_ok = np.abs(y / (-c6) - 1.0) < deviation_tol
    r_vdw_idx = len(r)
    for i in range(len(r) - 1, -1, -1):
        if dev_ok[i]:
            r_vdw_idx = i
        else:
            break
    if r_vdw_idx >= len(r):
        raise NoAsymptoteError("no sample satisfies the asymptote criterion")
    return C6Fit(
        c6_ghz_um6=c6,
        r_vdw_um=float(r[r_vdw_idx]),
        residual=residual,
        window=(int(start), len(r)),
    )


# -------------------------------------------------- channel / quad reports


def channel_contributions(basis, solver, geometry, medium, surface="cylinder",
                          params=DEFAULT_QUAD, member=0, top_k=8, **kwargs):
    """Vacuum-allowed vs fibre-enabled channel groups and their weights."""
    near = pt2(basis, solver, geometry, medium, surface, params=params,
               member=member, top_k=top_k, **kwargs)
    free = pt2(basis, solver, geometry, None, "vacuum", params=params,
               member=member, top_k=top_k, **kwargs)
    u0 = free.u_total_ghz
    allowed = sum(near.channels_ghz[c] for c in VACUUM_ALLOWED_CHANNELS)
    enabled = sum(near.channels_ghz[c] for c in FIBRE_ENABLED_CHANNELS)
    return {
        "u_total_ghz": near.u_total_ghz,
        "u_free_space_ghz": u0,
        "vacuum_allowed_ghz": allowed,
        "fibre_enabled_ghz": enabled,
        "vacuum_allowed_over_u0": allowed / u0 if u0 else math.nan,
        "fibre_enabled_over_u0": enabled / u0 if u0 else math.nan,
        "channels_ghz": near.channels_ghz,
        "top_pairs": near.top_pairs,
    }


def quad_contribution(basis, solver, geometry, medium=None, surface="vacuum",
                      params=DEFAULT_QUAD, mode="pt2", **kwargs):
    """U(multipole terms on) - U(dipole-dipole only), same solver mode."""
    if not basis.quad_enabled:
        raise ValueError("basis was built without quadrupole couplings")
    full = solve(basis, solver, geometry, mode=mode, medium=medium,
                 surface=surface, params=params, **kwargs)
    dip = solve(basis, solver, geometry, mode=mode, medium=medium,
                surface=surface, filt=ChannelFilter.dipole_only(),
                params=params, **kwargs)
    return full.u_total_ghz - dip.u_total_ghz
