"""Reduced single-channel models and the Forster detuning scan.

These closed forms describe the lateral configuration (equal radii,
interatomic axis along the fibre axis):

* single pi-pi channel: U/U0 = (1 + 2 pi dz^3 [T1]_zz)^2, independent of
  the dipole magnitudes;
* single sigma+ sigma+ channel with the quantisation axis at (Theta, Phi):
  U proportional to |d . (T0 + T1) . d|^2, which on the Phi = 0 and
  Theta = pi/2 slices reduces to
      (T0 + T_m - DT)^2 (sin^2 Theta - eta1)^2    and
      (T0 + T_m)^2 (1 - eta2 cos 2 Phi)^2,
  with T0 = 3/(4 pi dz^3), DT = ([T1]_xx - [T1]_yy)/2,
  T_m = [T1]_zz - ([T1]_xx + [T1]_yy)/2,
  eta1 = -2 DT/(T0 + T_m - DT), eta2 = -DT/(T0 + T_m).
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import FOUR_PI
from .propagators import DEFAULT_QUAD, anisotropy_coeffs, t1_cylinder


def pipi_ratio(delta_z_nm, t1zz):
    """Fibre-to-vacuum potential ratio of the single pi-pi channel."""
    if delta_z_nm <= 0:
        raise ValueError("need delta_z > 0")
    return (1.0 + 2.0 * math.pi * delta_z_nm**3 * t1zz) ** 2


def sigma_plus_vector(theta, phi):
    """Unit polarization of a sigma+ transition for axis (Theta, Phi)."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [-ct * cp - 1j * sp, -ct * sp + 1j * cp, st]
    ) / math.sqrt(2.0)


def lateral_t0(delta_z_nm):
    return np.diag([-1.0, -1.0, 2.0]) / (FOUR_PI * delta_z_nm**3)


def sigma_model(theta, phi, delta_z_nm, t1_matrix):
    """|d_sigma+ . (T0 + T1) . d_sigma+|^2 for unit dipole magnitudes.

    The contraction is evaluated numerically from the actual tensors, so
    the same code path serves both the closed-form slices and comparisons
    against the full solver.
    """
    v = sigma_plus_vector(theta, phi)
    total = lateral_t0(delta_z_nm) + np.asarray(t1_matrix)
    amp = v @ total @ v
    return float(abs(amp) ** 2)


@dataclass(frozen=True)
class EtaCoefficients:
    t0_scalar: float  # 3/(4 pi dz^3), nm^-3
    delta_t: float
    t_m: float

    @property
    def eta1(self):
        return -2.0 * self.delta_t / (self.t0_scalar + self.t_m - self.delta_t)

    @property
    def eta2(self):
        return -self.delta_t / (self.t0_scalar + self.t_m)


@dataclass(frozen=True)
class EtaReport:
    coefficients: EtaCoefficients
    a1: float
    a2: float
    theta_min_rad: float | None
    in_range: bool  # eta1 inside [0, 1]

    @property
    def theta_min_deg(self):
        return None if self.theta_min_rad is None else math.degrees(self.theta_min_rad)


def eta_report_from_tensor(delta_z_nm, t1_matrix):
    delta_t, t_m = anisotropy_coeffs(t1_matrix)
    coeff = EtaCoefficients(
        t0_scalar=3.0 / (FOUR_PI * delta_z_nm**3), delta_t=delta_t, t_m=t_m
    )
    eta1 = coeff.eta1
    in_range = 0.0 <= eta1 <= 1.0
    theta_min = math.asin(math.sqrt(eta1)) if in_range else None
    return EtaReport(
        coefficients=coeff,
        a1=eta1**2,
        a2=(1.0 - eta1) ** 2,
        theta_min_rad=theta_min,
        in_range=in_range,
    )


def eta_report(geometry, medium, params=DEFAULT_QUAD):
    """Anisotropy coefficients of the sigma+ sigma+ model at a lateral
    geometry, with the local maxima A1 = eta1^2, A2 = (1 - eta1)^2 and the
    zero position Theta_min = arcsin(sqrt(eta1)) (flagged out-of-range
    instead of raising when eta1 leaves [0, 1])."""
    if geometry.delta_phi != 0.0 or geometry.r_a_nm != geometry.r_b_nm:
        raise ValueError("eta coefficients are defined in the lateral configuration")
    t1m = t1_cylinder(geometry, medium, params)
    return eta_report_from_tensor(geometry.delta_z_nm, t1m)


@dataclass
class ForsterScan:
    n: np.ndarray
    delta1_ghz: np.ndarray  # 2 E(nP3/2) - E(nS1/2) - E((n-1)D5/2)
    delta2_ghz: np.ndarray  # 2 E(nP3/2) - E(nS1/2) - E((n+1)S1/2)

    @property
    def ratio(self):
        return self.delta1_ghz / self.delta2_ghz

    def sign_change_n(self):
        """First n at which delta2 has flipped sign relative to n_min."""
        s = np.sign(self.delta2_ghz)
        flips = np.nonzero(s[1:] != s[0])[0]
        return None if len(flips) == 0 else int(self.n[flips[0] + 1])


def forster_scan(n_min, n_max, defects):
    """Detunings of the two dominant pair channels of |nP3/2> |nP3/2>:
    (1) -> |nS1/2> |(n-1)D5/2> and (2) -> |nS1/2> |(n+1)S1/2>, in the
    convention delta = (E_initial_pair - E_final_pair)/h (positive means
    the final pair lies below the initial one)."""
    from .atomic import AtomState

    ns = np.arange(n_min, n_max + 1)
    d1, d2 = [], []
    for n in ns:
        e_p = defects.energy_ghz(AtomState(int(n), 1, 3, 1))
        e_s = defects.energy_ghz(AtomState(int(n), 0, 1, 1))
        e_d = defects.energy_ghz(AtomState(int(n) - 1, 2, 5, 1))
        e_s2 = defects.energy_ghz(AtomState(int(n) + 1, 0, 1, 1))
        d1.append(2.0 * e_p - e_s - e_d)
        d2.append(2.0 * e_p - e_s - e_s2)
    return ForsterScan(ns, np.array(d1), np.array(d2))
