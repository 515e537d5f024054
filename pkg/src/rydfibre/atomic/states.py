"""Single-atom Rydberg level labels."""

from dataclasses import dataclass

L_LETTERS = "SPDFGHIK"


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class AtomState:
    """One-atom Rydberg level |n, L, J, M_J>.

    J and M_J are half-integers and are stored doubled (two_j = 2J,
    two_mj = 2 M_J) so selection-rule arithmetic stays exact.
    """

    n: int
    l: int
    two_j: int
    two_mj: int

    def __post_init__(self):
        if self.n < 5:
            raise InvalidStateError(f"principal quantum number too small: {self.n}")
        if not 0 <= self.l < self.n:
            raise InvalidStateError(f"need 0 <= L < n, got L={self.l}, n={self.n}")
        allowed = {2 * self.l + 1} if self.l == 0 else {2 * self.l - 1, 2 * self.l + 1}
        if self.two_j not in allowed:
            raise InvalidStateError(
                f"J={self.two_j}/2 incompatible with L={self.l} for spin 1/2"
            )
        if abs(self.two_mj) > self.two_j or (self.two_mj - self.two_j) % 2 != 0:
            raise InvalidStateError(
                f"M_J={self.two_mj}/2 invalid for J={self.two_j}/2"
            )

    @classmethod
    def make(cls, n, l, j, mj):
        """Build from float J, M_J (e.g. AtomState.make(30, 0, 0.5, 0.5))."""
        return cls(n, l, int(round(2 * j)), int(round(2 * mj)))

    @property
    def j(self):
        return self.two_j / 2.0

    @property
    def mj(self):
        return self.two_mj / 2.0

    @property
    def series(self):
        """(L, 2J) key into the quantum-defect table."""
        return (self.l, self.two_j)

    def label(self, with_mj=True):
        letter = L_LETTERS[self.l] if self.l < len(L_LETTERS) else f"L{self.l}"
        s = f"{self.n}{letter}{self.two_j}/2"
        if with_mj:
            s += f",{self.two_mj:+d}/2"
        return s

    def __str__(self):
        return self.label()
