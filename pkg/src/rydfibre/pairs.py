"""Two-atom product basis and effective interaction matrix.

The interaction between atoms A and B in the nonretarded limit is

    H = (1/eps0) [ d_A . T . d_B
                 + d_A . (T (x) grad_B) * Q_B
                 + Q_A * (grad_A (x) T) . d_B
                 + Q_A * (grad_A (x) T (x) grad_B) * Q_B ]

with T = T0 + T1 the static propagator and * the Frobenius pairing
a * b = sum_ij a_ij b_ji.  Index conventions (fixed here, used
everywhere): T[i, j] pairs i with atom A and j with atom B;
(T (x) grad_B)[i, j, k] = dT_ij/dr_Bk; (grad_A (x) T)[k, i, j] =
dT_ij/dr_Ak.  With symmetric Q the four contractions reduce to

    dQ: sum_ijk dA_i (dT_ij/dr_Bk) QB_jk
    Qd: sum_ijk QA_ik (dT_ij/dr_Ak) dB_j
    QQ: sum_ijkl QA_ik QB_jl d^2T_ij/dr_Ak dr_Bl.

Pair detunings follow the source convention
delta_kl = (E_initial_pair - E_pair)/h (zero for the initial pair,
positive for pairs below it); the assembled matrix carries the physical
diagonal -delta_kl so eigenvalues are energies relative to the initial
pair.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .atomic import AtomState, dipole_allowed, quadrupole_allowed
from .atomic.multipole import dipole_vector, quadrupole_tensor
from .constants import K_DD_GHZ, K_DQ_GHZ, K_QQ_GHZ
from .propagators import DEFAULT_QUAD, grad2_t, grad_t, t0, t1

CHANNELS = ("pi-pi", "pi-sigma", "sigma-sigma-same", "sigma-sigma-opposite")
VACUUM_ALLOWED_CHANNELS = ("pi-pi", "sigma-sigma-opposite")
FIBRE_ENABLED_CHANNELS = ("pi-sigma", "sigma-sigma-same")


class EmptyBasisError(ValueError):
    pass


class BasisTooLargeError(RuntimeError):
    pass


class NotSingleStepError(ValueError):
    pass


@dataclass(frozen=True)
class PairState:
    a: AtomState
    b: AtomState
    delta_ghz: float

    def key(self):
        sa, sb = self.a, self.b
        return (sa.n, sa.l, sa.two_j, sa.two_mj, sb.n, sb.l, sb.two_j, sb.two_mj)

    def __str__(self):
        return f"|{self.a}> |{self.b}>  (delta = {self.delta_ghz:+.3f} GHz)"


@dataclass(frozen=True)
class BasisWindow:
    n_half_width: int = 10
    l_max: int = 4
    energy_cutoff_ghz: float = 500.0

    def widened(self, extra=1):
        return replace(self, n_half_width=self.n_half_width + extra)


@dataclass(frozen=True)
class ChannelFilter:
    channels: frozenset = frozenset(CHANNELS)
    include_dipole_dipole: bool = True
    include_dipole_quadrupole: bool = True
    include_quadrupole_quadrupole: bool = True

    @classmethod
    def only(cls, *channels):
        return cls(channels=frozenset(channels))

    @classmethod
    def dipole_only(cls):
        return cls(include_dipole_quadrupole=False, include_quadrupole_quadrupole=False)


def channel_name(dm_a, dm_b):
    """Coupling class from the two atoms' dipole-step M_J changes."""
    if dm_a == 0 and dm_b == 0:
        return "pi-pi"
    if dm_a == 0 or dm_b == 0:
        return "pi-sigma"
    return "sigma-sigma-same" if dm_a == dm_b else "sigma-sigma-opposite"


def classify_channel(initial: PairState, coupled: PairState):
    """Channel of a pair reached from `initial` by one dipole step per atom."""
    if not (dipole_allowed(initial.a, coupled.a) and dipole_allowed(initial.b, coupled.b)):
        raise NotSingleStepError(
            f"{coupled} is not a single dipole step from {initial}"
        )
    dm_a = (coupled.a.two_mj - initial.a.two_mj) // 2
    dm_b = (coupled.b.two_mj - initial.b.two_mj) // 2
    if abs(dm_a) > 1 or abs(dm_b) > 1:
        raise NotSingleStepError("M_J changed by more than one unit")
    return channel_name(dm_a, dm_b)


# ------------------------------------------------------------------ basis


def _series_in(table, l, two_j):
    try:
        table.defect(30, l, two_j)
    except KeyError:
        return False
    return True


def _dipole_targets(state, window, table):
    out = []
    for l2 in (state.l - 1, state.l + 1):
        if l2 < 0 or l2 > window.l_max:
            continue
        for two_j2 in ({1} if l2 == 0 else {2 * l2 - 1, 2 * l2 + 1}):
            if abs(two_j2 - state.two_j) > 2 or not _series_in(table, l2, two_j2):
                continue
            for two_mj2 in range(state.two_mj - 2, state.two_mj + 3, 2):
                if abs(two_mj2) > two_j2:
                    continue
                for n2 in range(
                    max(l2 + 1, 5, state.n - window.n_half_width),
                    state.n + window.n_half_width + 1,
                ):
                    out.append(AtomState(n2, l2, two_j2, two_mj2))
    return out


def _quad_targets(state, window, table):
    out = []
    for l2 in (state.l - 2, state.l, state.l + 2):
        if l2 < 0 or l2 > window.l_max or (l2 == 0 and state.l == 0):
            continue
        for two_j2 in ({1} if l2 == 0 else {2 * l2 - 1, 2 * l2 + 1}):
            if (
                abs(two_j2 - state.two_j) > 4
                or two_j2 + state.two_j < 4
                or not _series_in(table, l2, two_j2)
            ):
                continue
            for two_mj2 in range(state.two_mj - 4, state.two_mj + 5, 2):
                if abs(two_mj2) > two_j2:
                    continue
                for n2 in range(
                    max(l2 + 1, 5, state.n - window.n_half_width),
                    state.n + window.n_half_width + 1,
                ):
                    cand = AtomState(n2, l2, two_j2, two_mj2)
                    if quadrupole_allowed(state, cand):
                        out.append(cand)
    return out


def default_manifold(a: AtomState, b: AtomState):
    """Degenerate products obtained by flipping the signs of both M_J's."""
    members = []
    for sa_m in {a.two_mj, -a.two_mj}:
        for sb_m in {b.two_mj, -b.two_mj}:
            members.append(
                (AtomState(a.n, a.l, a.two_j, sa_m), AtomState(b.n, b.l, b.two_j, sb_m))
            )
    members.sort(key=lambda p: (p[0].two_mj, p[1].two_mj), reverse=True)
    # requested member first
    members.remove((a, b))
    return [(a, b)] + members


class PairBasis:
    """Ordered two-atom basis; the initial manifold sits at the front."""

    def __init__(self, states, manifold_size, window, quad_enabled):
        self.states = states
        self.manifold_size = manifold_size
        self.window = window
        self.quad_enabled = quad_enabled
        self._tables = {}

    @property
    def initial(self):
        return self.states[0]

    @property
    def manifold_indices(self):
        return list(range(self.manifold_size))

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def to_csv(self, path):
        """Debug/regression dump, one row per pair state."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["idx", "nA", "LA", "2JA", "2MJA", "nB", "LB", "2JB", "2MJB", "delta_GHz"]
            )
            for i, p in enumerate(self.states):
                writer.writerow(
                    [i, p.a.n, p.a.l, p.a.two_j, p.a.two_mj,
                     p.b.n, p.b.l, p.b.two_j, p.b.two_mj,
                     f"{p.delta_ghz:.9f}"]
                )

    def tables(self, solver, axis):
        key = (id(solver), float(axis[0]), float(axis[1]))
        if key not in self._tables:
            self._tables[key] = AssemblyTables(self, solver, axis)
        return self._tables[key]


def build_basis(initial_a, initial_b, window=BasisWindow(), quad_enabled=False,
                defects=None, solver=None, include_manifold=True):
    """Enumerate product states directly coupled to the initial manifold.

    Each retained pair has both atoms reachable by one allowed dipole (or,
    with quad_enabled, quadrupole) transition from a manifold member, lies
    inside the n-window, and has |delta| below the energy cutoff.  Ordering
    is deterministic: manifold first, then by |delta|, then lexicographic.
    """
    if defects is None and solver is not None:
        defects = solver.defects
    if defects is None:
        raise ValueError("build_basis needs a quantum-defect table")

    manifold = (
        default_manifold(initial_a, initial_b)
        if include_manifold
        else [(initial_a, initial_b)]
    )
    e_init = defects.energy_ghz(initial_a) + defects.energy_ghz(initial_b)

    pair_keys = {}
    for sa, sb in manifold:
        ta = list(_dipole_targets(sa, window, defects))
        tb = list(_dipole_targets(sb, window, defects))
        if quad_enabled:
            ta += [t for t in _quad_targets(sa, window, defects)]
            tb += [t for t in _quad_targets(sb, window, defects)]
        ta = list(dict.fromkeys(ta))
        tb = list(dict.fromkeys(tb))
        ea = np.array([defects.energy_ghz(s) for s in ta])
        eb = np.array([defects.energy_ghz(s) for s in tb])
        delta = e_init - (ea[:, None] + eb[None, :])
        keep = np.abs(delta) <= window.energy_cutoff_ghz
        for i, j in zip(*np.nonzero(keep)):
            pair = (ta[i], tb[j])
            if pair not in pair_keys:
                pair_keys[pair] = float(delta[i, j])

    if window.n_half_width < 0 or window.energy_cutoff_ghz <= 0 or window.l_max < 0:
        raise EmptyBasisError(f"degenerate basis window {window}")

    manifold_pairs = []
    for sa, sb in manifold:
        pair_keys.pop((sa, sb), None)
        manifold_pairs.append(PairState(sa, sb, 0.0))

    coupled = [PairState(a, b, d) for (a, b), d in pair_keys.items()]
    coupled.sort(key=lambda p: (abs(p.delta_ghz), p.key()))
    return PairBasis(
        manifold_pairs + coupled, len(manifold_pairs), window, quad_enabled
    )


# -------------------------------------------------------------- assembly


class AssemblyTables:
    """Geometry-independent single-atom matrix-element tables for a basis.

    Dipole tables d[i][s, s'] = <s| d_i |s'> and quadrupole tables
    q[i, j][s, s'] over the distinct single-atom states of each slot, plus
    the index of every pair state into those lists.
    """

    def __init__(self, basis, solver, axis):
        self.axis = axis
        states_a = list(dict.fromkeys(p.a for p in basis))
        states_b = list(dict.fromkeys(p.b for p in basis))
        index_a = {s: i for i, s in enumerate(states_a)}
        index_b = {s: i for i, s in enumerate(states_b)}
        self.ia = np.array([index_a[p.a] for p in basis], dtype=np.int32)
        self.ib = np.array([index_b[p.b] for p in basis], dtype=np.int32)
        self.deltas = np.array([p.delta_ghz for p in basis])
        self.two_mj_a = np.array([s.two_mj for s in states_a], dtype=np.int16)
        self.two_mj_b = np.array([s.two_mj for s in states_b], dtype=np.int16)

        self.d_a = self._dipole_table(states_a, solver, axis)
        self.d_b = self._dipole_table(states_b, solver, axis)
        if basis.quad_enabled:
            self.q_a = self._quad_table(states_a, solver, axis)
            self.q_b = self._quad_table(states_b, solver, axis)
        else:
            self.q_a = self.q_b = None

    @staticmethod
    def _dipole_table(states, solver, axis):
        n = len(states)
        table = np.zeros((3, n, n), dtype=complex)
        for r, bra in enumerate(states):
            for c, ket in enumerate(states):
                if dipole_allowed(ket, bra):
                    vec = dipole_vector(solver, ket, bra, axis)
                    if np.any(vec):
                        table[:, r, c] = vec
        return table

    @staticmethod
    def _quad_table(states, solver, axis):
        n = len(states)
        table = np.zeros((3, 3, n, n), dtype=complex)
        for r, bra in enumerate(states):
            for c, ket in enumerate(states):
                if quadrupole_allowed(ket, bra):
                    table[:, :, r, c] = quadrupole_tensor(solver, ket, bra, axis)
        return table


def _interaction_block(tables, rows, cols, tensor, grad_a, grad_b, grad2, filt):
    """Interaction elements (GHz) between pair states rows x cols for one
    propagator tensor (plus its gradients)."""
    ia_r = tables.ia[rows][:, None]
    ib_r = tables.ib[rows][:, None]
    ia_c = tables.ia[cols][None, :]
    ib_c = tables.ib[cols][None, :]
    out = np.zeros((len(rows), len(cols)), dtype=complex)

    if filt.include_dipole_dipole:
        dd = np.zeros_like(out)
        for i in range(3):
            for j in range(3):
                if tensor[i, j] == 0.0:
                    continue
                dd += tensor[i, j] * tables.d_a[i][ia_r, ia_c] * tables.d_b[j][ib_r, ib_c]
        if filt.channels != frozenset(CHANNELS):
            dma = (tables.two_mj_a[ia_r] - tables.two_mj_a[ia_c]) // 2
            dmb = (tables.two_mj_b[ib_r] - tables.two_mj_b[ib_c]) // 2
            mask = np.zeros(dd.shape, dtype=bool)
            single = (np.abs(dma) <= 1) & (np.abs(dmb) <= 1)
            pi_a, pi_b = dma == 0, dmb == 0
            sels = {
                "pi-pi": pi_a & pi_b,
                "pi-sigma": pi_a ^ pi_b,
                "sigma-sigma-same": ~pi_a & ~pi_b & (dma == dmb),
                "sigma-sigma-opposite": ~pi_a & ~pi_b & (dma == -dmb),
            }
            for name, sel in sels.items():
                if name in filt.channels:
                    mask |= sel & single
            dd = np.where(mask, dd, 0.0)
        out += K_DD_GHZ * dd

    if tables.q_a is not None and filt.include_dipole_quadrupole:
        dq = np.zeros_like(out)
        qd = np.zeros_like(out)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    gb = grad_b[i, j, k]
                    if gb != 0.0:
                        dq += gb * tables.d_a[i][ia_r, ia_c] * tables.q_b[j, k][ib_r, ib_c]
                    ga = grad_a[i, j, k]
                    if ga != 0.0:
                        qd += ga * tables.q_a[i, k][ia_r, ia_c] * tables.d_b[j][ib_r, ib_c]
        out += K_DQ_GHZ * (dq + qd)

    if tables.q_a is not None and filt.include_quadrupole_quadrupole:
        qq = np.zeros_like(out)
        for i in range(3):
            for k in range(3):
                qa = tables.q_a[i, k][ia_r, ia_c]
                if not np.any(qa):
                    continue
                for j in range(3):
                    for l in range(3):
                        g2 = grad2[i, j, k, l]
                        if g2 != 0.0:
                            qq += g2 * qa * tables.q_b[j, l][ib_r, ib_c]
        out += K_QQ_GHZ * qq
    return out


def _propagator_set(geometry, medium, surface, params, need_grads):
    tensor0 = t0(geometry)
    tensor1 = t1(geometry, medium, surface, params)
    z3 = np.zeros((3, 3, 3))
    z4 = np.zeros((3, 3, 3, 3))
    if need_grads:
        g0a = grad_t(geometry, which="A", part="free")
        g0b = grad_t(geometry, which="B", part="free")
        g20 = grad2_t(geometry, part="free")
        if surface == "vacuum" or medium is None:
            g1a, g1b, g21 = z3, z3, z4
        else:
            g1a = grad_t(geometry, medium, "A", "reflected", surface, params)
            g1b = grad_t(geometry, medium, "B", "reflected", surface, params)
            g21 = grad2_t(geometry, medium, "reflected", surface, params)
        return (tensor0, g0a, g0b, g20), (tensor1, g1a, g1b, g21)
    return (tensor0, z3, z3, z4), (tensor1, z3, z3, z4)


def interaction_rows(basis, tables, geometry, medium=None, surface="vacuum",
                     filt=None, params=DEFAULT_QUAD, rows=None):
    """(V0, V1): free-space and reflected coupling amplitudes (GHz) from the
    given rows (default: the initial manifold) to every basis state."""
    filt = filt or ChannelFilter()
    if rows is None:
        rows = np.array(basis.manifold_indices)
    else:
        rows = np.asarray(rows)
    cols = np.arange(len(basis))
    need_grads = basis.quad_enabled and (
        filt.include_dipole_quadrupole or filt.include_quadrupole_quadrupole
    )
    set0, set1 = _propagator_set(geometry, medium, surface, params, need_grads)
    v0 = _interaction_block(tables, rows, cols, set0[0], set0[1], set0[2], set0[3], filt)
    if surface == "vacuum" or medium is None:
        v1 = np.zeros_like(v0)
    else:
        v1 = _interaction_block(tables, rows, cols, set1[0], set1[1], set1[2], set1[3], filt)
    return v0, v1


def assemble(basis, solver, geometry, medium=None, surface="vacuum", filt=None,
             params=DEFAULT_QUAD, max_dim=6000, block=1024):
    """Full Hermitian pair Hamiltonian (GHz): physical diagonal -delta_kl,
    interaction elements off the diagonal (and between distinct pairs)."""
    n = len(basis)
    if n > max_dim:
        raise BasisTooLargeError(f"basis size {n} exceeds max_dim={max_dim}")
    filt = filt or ChannelFilter()
    tables = basis.tables(solver, geometry.axis)
    need_grads = basis.quad_enabled and (
        filt.include_dipole_quadrupole or filt.include_quadrupole_quadrupole
    )
    set0, set1 = _propagator_set(geometry, medium, surface, params, need_grads)
    tensor = set0[0] + set1[0]
    ga = set0[1] + set1[1]
    gb = set0[2] + set1[2]
    g2 = set0[3] + set1[3]

    h = np.zeros((n, n), dtype=complex)
    cols = np.arange(n)
    for lo in range(0, n, block):
        rows = np.arange(lo, min(lo + block, n))
        h[lo : rows[-1] + 1] = _interaction_block(
            tables, rows, cols, tensor, ga, gb, g2, filt
        )
    np.fill_diagonal(h, -tables.deltas)
    return h
