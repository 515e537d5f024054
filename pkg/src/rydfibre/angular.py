"""Angular-momentum coupling coefficients.

All routines take angular momenta as *doubled integers* (two_j = 2j,
two_m = 2m) so half-integer bookkeeping stays exact.  Sums are evaluated
with exact integer factorials; only the final square roots are floats,
which keeps every coefficient accurate to machine precision for the
small momenta used here (j <= 9/2 plus tensor ranks 1 and 2).
"""

import math
from functools import lru_cache

__all__ = ["wigner_3j", "wigner_6j", "clebsch_gordan", "reduced_c_tensor"]


def _fact(n):
    if n < 0:
        raise ValueError("negative factorial argument")
    return math.factorial(n)


def _triangle_ok(two_a, two_b, two_c):
    return (
        abs(two_a - two_b) <= two_c <= two_a + two_b
        and (two_a + two_b + two_c) % 2 == 0
    )


def _delta_sq(two_a, two_b, two_c):
    """Squared triangle coefficient as an exact Fraction-like pair."""
    num = (
        _fact((two_a + two_b - two_c) // 2)
        * _fact((two_a - two_b + two_c) // 2)
        * _fact((-two_a + two_b + two_c) // 2)
    )
    den = _fact((two_a + two_b + two_c) // 2 + 1)
    return num, den


@lru_cache(maxsize=None)
def wigner_3j(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3):
    """Wigner 3j symbol with doubled-integer arguments."""
    if two_m1 + two_m2 + two_m3 != 0:
        return 0.0
    if not _triangle_ok(two_j1, two_j2, two_j3):
        return 0.0
    for tj, tm in ((two_j1, two_m1), (two_j2, two_m2), (two_j3, two_m3)):
        if abs(tm) > tj or (tj - tm) % 2 != 0:
            return 0.0

    jm = [
        (two_j1 + two_m1) // 2, (two_j1 - two_m1) // 2,
        (two_j2 + two_m2) // 2, (two_j2 - two_m2) // 2,
        (two_j3 + two_m3) // 2, (two_j3 - two_m3) // 2,
    ]
    dnum, dden = _delta_sq(two_j1, two_j2, two_j3)

    t1 = (two_j1 + two_j2 - two_j3) // 2
    t2 = (two_j1 - two_m1) // 2
    t3 = (two_j2 + two_m2) // 2
    t4 = (two_j3 - two_j2 + two_m1) // 2
    t5 = (two_j3 - two_j1 - two_m2) // 2

    kmin = max(0, -t4, -t5)
    kmax = min(t1, t2, t3)
    ssum = 0.0
    for k in range(kmin, kmax + 1):
        term = (
            _fact(k) * _fact(t1 - k) * _fact(t2 - k) * _fact(t3 - k)
            * _fact(t4 + k) * _fact(t5 + k)
        )
        ssum += (-1) ** k / term

    phase = (-1) ** ((two_j1 - two_j2 - two_m3) // 2)
    norm = math.sqrt(dnum / dden * math.prod(_fact(x) for x in jm))
    return phase * norm * ssum


@lru_cache(maxsize=None)
def wigner_6j(two_j1, two_j2, two_j3, two_j4, two_j5, two_j6):
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6} with doubled-integer arguments."""
    triads = (
        (two_j1, two_j2, two_j3),
        (two_j1, two_j5, two_j6),
        (two_j4, two_j2, two_j6),
        (two_j4, two_j5, two_j3),
    )
    for tri in triads:
        if not _triangle_ok(*tri):
            return 0.0

    norm = 1.0
    for tri in triads:
        dn, dd = _delta_sq(*tri)
        norm *= dn / dd
    norm = math.sqrt(norm)

    a = (two_j1 + two_j2 + two_j3) // 2
    b = (two_j1 + two_j5 + two_j6) // 2
    c = (two_j4 + two_j2 + two_j6) // 2
    d = (two_j4 + two_j5 + two_j3) // 2
    e = (two_j1 + two_j2 + two_j4 + two_j5) // 2
    f = (two_j2 + two_j3 + two_j5 + two_j6) // 2
    g = (two_j3 + two_j1 + two_j6 + two_j4) // 2

    zmin = max(a, b, c, d)
    zmax = min(e, f, g)
    ssum = 0.0
    for z in range(zmin, zmax + 1):
        num = _fact(z + 1)
        den = (
            _fact(z - a) * _fact(z - b) * _fact(z - c) * _fact(z - d)
            * _fact(e - z) * _fact(f - z) * _fact(g - z)
        )
        ssum += (-1) ** z * num / den
    return norm * ssum


@lru_cache(maxsize=None)
def clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m):
    """Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m> (doubled arguments)."""
    if two_m1 + two_m2 != two_m:
        return 0.0
    phase = (-1) ** ((-two_j1 + two_j2 - two_m) // 2)
    return (
        phase
        * math.sqrt(two_j + 1.0)
        * wigner_3j(two_j1, two_j2, two_j, two_m1, two_m2, -two_m)
    )


@lru_cache(maxsize=None)
def reduced_c_tensor(l_bra, k, l_ket):
    """Reduced matrix element <l_bra || C^k || l_ket> of the spherical
    tensor C^k_q = sqrt(4 pi / (2k+1)) Y_kq, in the convention

        <l' || C^k || l> = (-1)^l' sqrt((2l'+1)(2l+1)) (l' k l; 0 0 0).
    """
    tj = wigner_3j(2 * l_bra, 2 * k, 2 * l_ket, 0, 0, 0)
    return (-1) ** l_bra * math.sqrt((2 * l_bra + 1) * (2 * l_ket + 1)) * tj
