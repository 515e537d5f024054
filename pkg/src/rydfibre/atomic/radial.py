"""Radial wavefunctions and matrix elements by Numerov integration.

The radial Schrodinger equation for u(r) = r R(r) with a pure Coulomb
potential and a quantum-defect energy E = -1/(2 n*^2) is integrated on a
logarithmic grid x = ln r.  Substituting u = sqrt(r) w(x) gives

    w''(x) = G(x) w(x),
    G(x) = 1/4 + L(L+1) + 2 r^2 (V(r) - E),   r = e^x,

which the Numerov scheme integrates inward from r_max = 2 n (n + 15)
(beyond the outer classical turning point) to an inner cutoff near the
ionic core, r_min ~ alpha_core^(1/3).  The inner region is inaccurate by
construction; matrix elements between Rydberg states are dominated by
large r, where this treatment is good to better than a percent.

All lengths in Bohr radii, energies in Hartree.
"""

import math
import threading

import numpy as np

from .defects import QuantumDefectTable
from .states import AtomState


class RadialConvergenceError(RuntimeError):
    """Grid bounds failed to bracket the classically allowed region."""


class RadialSolver:
    """Numerov solver with a memoising cache of wavefunctions and integrals.

    The cache is read-mostly and guarded by a lock, so one instance can be
    shared across threads; for process pools, pre-populate before forking.
    """

    def __init__(self, defects: QuantumDefectTable, dx=2.0e-3, r_min_au=None):
        self.defects = defects
        self.dx = float(dx)
        if r_min_au is None:
            r_min_au = max(defects.core_polarizability_au ** (1.0 / 3.0), 1e-3)
        self.r_min_au = float(r_min_au)
        self._wf_cache = {}
        self._int_cache = {}
        self._lock = threading.Lock()

    # -- wavefunctions ----------------------------------------------------

    def wavefunction(self, n, l, two_j):
        """Return (i0, r, w): lattice offset, radii and scaled amplitude w.

        w = u / sqrt(r), normalized so that sum(w^2 r^2) dx = 1.  All
        states share one global lattice x_k = k dx, so arrays for two
        states align by index offset i0.
        """
        key = (n, l, two_j)
        with self._lock:
            hit = self._wf_cache.get(key)
        if hit is not None:
            return hit

        n_star = self.defects.n_star(n, l, two_j)
        energy = -0.5 / n_star**2
        r_max = 2.0 * n * (n + 15.0)
        # effective inner cutoff: never above half the inner turning point
        r_in_tp = n_star**2 - n_star * math.sqrt(max(n_star**2 - l * (l + 1), 0.0))
        r_min = self.r_min_au
        if l > 0 and r_in_tp > 0:
            r_min = min(r_min, 0.5 * r_in_tp)
        r_min = max(r_min, 1e-4)
        if r_min >= r_max:
            raise RadialConvergenceError(
                f"grid bounds empty for n={n}, L={l}: [{r_min}, {r_max}]"
            )

        dx = self.dx
        i0 = int(math.ceil(math.log(r_min) / dx))
        i1 = int(math.floor(math.log(r_max) / dx))
        if i1 - i0 < 10:
            raise RadialConvergenceError("fewer than 10 radial grid points")
        x = np.arange(i0, i1 + 1) * dx
        r = np.exp(x)
        g = 0.25 + l * (l + 1) + 2.0 * r**2 * (-1.0 / r - energy)

        w = _numerov_inward(g, dx)
        norm = math.sqrt(np.sum(w**2 * r**2) * dx)
        if not (norm > 0 and np.isfinite(norm)):
            raise RadialConvergenceError(f"normalization failed for n={n}, L={l}")
        w = w / norm

        out = (i0, r, w)
        with self._lock:
            self._wf_cache[key] = out
        return out

    # -- matrix elements --------------------------------------------------

    def radial_integral(self, a: AtomState, b: AtomState, power=1):
        """<a| r^power |b> = int R_a R_b r^(2+power) dr, atomic units.

        Symmetric in (a, b) by construction; depends only on (n, L, J).
        """
        return self.radial_integral_raw(
            (a.n, a.l, a.two_j), (b.n, b.l, b.two_j), power
        )

    def radial_integral_raw(self, ka, kb, power=1):
        """Same as radial_integral but keyed by raw (n, L, 2J) tuples."""
        key = (min(ka, kb), max(ka, kb), power)
        with self._lock:
            hit = self._int_cache.get(key)
        if hit is not None:
            return hit

        ia, ra, wa = self.wavefunction(*ka)
        ib, rb, wb = self.wavefunction(*kb)
        lo = max(ia, ib)
        hi = min(ia + len(wa), ib + len(wb))
        if hi <= lo:
            value = 0.0
        else:
            sa = slice(lo - ia, hi - ia)
            sb = slice(lo - ib, hi - ib)
            # int u_a u_b r^p dr = sum w_a w_b r^(p+2) dx on the log grid
            value = float(
                np.sum(wa[sa] * wb[sb] * ra[sa] ** (power + 2)) * self.dx
            )
        with self._lock:
            self._int_cache[key] = value
        return value

    def norm_check(self, n, l, two_j):
        """int R^2 r^2 dr, should be 1."""
        _, r, w = self.wavefunction(n, l, two_j)
        return float(np.sum(w**2 * r**2) * self.dx)


def _numerov_inward(g, dx):
    """Integrate w'' = g w inward (decreasing index) with the Numerov scheme."""
    f = 1.0 - dx * dx / 12.0 * g
    w = np.zeros_like(g)
    w[-1] = 0.0
    w[-2] = 1e-10
    for i in range(len(g) - 2, 0, -1):
        w[i - 1] = ((12.0 - 10.0 * f[i]) * w[i] - f[i + 1] * w[i + 1]) / f[i - 1]
        # rescale the computed tail to dodge overflow; global scale is free
        if abs(w[i - 1]) > 1e100:
            w[i - 1 :] /= 1e100
    return w
