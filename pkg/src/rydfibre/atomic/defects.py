"""Quantum-defect table and Rydberg-Ritz level energies."""

import importlib.resources
from dataclasses import dataclass, field

from .states import AtomState

# L at and above which an absent series falls back to hydrogenic delta = 0.
HYDROGENIC_L_MIN = 5


class MissingSeriesError(KeyError):
    """Raised when a requested (L, J) series is not in the defect table."""


@dataclass(frozen=True)
class QuantumDefectTable:
    """Rydberg-Ritz parameters per (L, 2J) series plus the Rydberg constant.

    delta(n) = delta0 + delta2 / (n - delta0)^2 and
    E(n, L, J) = -rydberg_ghz / (n - delta)^2 (GHz, relative to ionization).
    """

    species: str
    rydberg_ghz: float
    core_polarizability_au: float
    series: dict = field(default_factory=dict)  # (L, 2J) -> (delta0, delta2)

    def defect(self, n, l, two_j):
        key = (l, two_j)
        if key in self.series:
            d0, d2 = self.series[key]
        elif l >= HYDROGENIC_L_MIN:
            d0, d2 = 0.0, 0.0
        else:
            raise MissingSeriesError(f"no quantum-defect data for series {key}")
        return d0 + d2 / (n - d0) ** 2

    def n_star(self, n, l, two_j):
        return n - self.defect(n, l, two_j)

    def energy_ghz(self, state: AtomState):
        """Level energy in GHz relative to the ionization limit (negative)."""
        return -self.rydberg_ghz / self.n_star(state.n, state.l, state.two_j) ** 2


def _parse_lines(lines, path_label):
    series = {}
    meta = {"species": "Rb"}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 2:
            key, value = parts
            meta[key] = value
        elif len(parts) == 5:
            species, l, two_j, d0, d2 = parts
            meta["species"] = species
            series[(int(l), int(two_j))] = (float(d0), float(d2))
        else:
            raise ValueError(f"unparseable defect-table line in {path_label}: {raw!r}")
    if "rydberg_GHz" not in meta:
        raise ValueError(f"defect table {path_label} lacks a rydberg_GHz entry")
    return QuantumDefectTable(
        species=meta["species"],
        rydberg_ghz=float(meta["rydberg_GHz"]),
        core_polarizability_au=float(meta.get("core_polarizability_au", 9.076)),
        series=series,
    )


def load_defects(path=None):
    """Load a quantum-defect table; default is the bundled 87Rb data."""
    if path is None:
        ref = importlib.resources.files("rydfibre.atomic").joinpath(
            "data/rb87_quantum_defects.txt"
        )
        with ref.open() as fh:
            return _parse_lines(fh, "builtin rb87 table")
    with open(path) as fh:
        return _parse_lines(fh, str(path))


def hydrogen_table(rydberg_ghz=None, core_polarizability_au=1e-12):
    """All-zero-defect table, used for hydrogenic cross-checks."""
    from ..constants import RYDBERG_INF_GHZ

    series = {}
    for l in range(0, 6):
        for two_j in ({1} if l == 0 else {2 * l - 1, 2 * l + 1}):
            series[(l, two_j)] = (0.0, 0.0)
    return QuantumDefectTable(
        species="H",
        rydberg_ghz=rydberg_ghz if rydberg_ghz is not None else RYDBERG_INF_GHZ,
        core_polarizability_au=core_polarizability_au,
        series=series,
    )
