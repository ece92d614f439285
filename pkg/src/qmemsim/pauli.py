"""Pauli operators as pairs of bit masks (global phases are dropped)."""
from __future__ import annotations

import numpy as np

_LETTERS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class PauliOperator:
    """Tensor product of single-qubit Paulis on ``n`` qubits.

    Parameters
    ----------
    xmask, zmask : array_like of {0, 1}
        X part and Z part; a Y on qubit ``i`` sets both bits.
    """

    __slots__ = ("xmask", "zmask")

    def __init__(self, xmask, zmask=None):
        x = np.asarray(xmask, dtype=np.uint8) & 1
        z = np.zeros_like(x) if zmask is None else np.asarray(zmask, dtype=np.uint8) & 1
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("masks must be 1-d arrays of equal length")
        self.xmask = x
        self.zmask = z

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOperator":
        P = cls.identity(n)
        P.xmask[qubit], P.zmask[qubit] = _LETTERS[letter.upper()]
        return P

    @classmethod
    def from_qubits(cls, n: int, qubits, letter: str) -> "PauliOperator":
        """Same letter on every listed qubit (repeats cancel pairwise)."""
        bx, bz = _LETTERS[letter.upper()]
        counts = np.bincount(np.asarray(qubits, dtype=np.int64).ravel(), minlength=n)[:n] & 1
        c = counts.astype(np.uint8)
        return cls(c * bx, c * bz)

    @classmethod
    def from_string(cls, s: str) -> "PauliOperator":
        bits = np.array([_LETTERS[ch] for ch in s.upper()], dtype=np.uint8).reshape(-1, 2)
        return cls(bits[:, 0], bits[:, 1])

    def __len__(self):
        return len(self.xmask)

    @property
    def n(self) -> int:
        return len(self.xmask)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.xmask | self.zmask))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.xmask | self.zmask)

    def is_identity(self) -> bool:
        return not (self.xmask.any() or self.zmask.any())

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return PauliOperator(self.xmask ^ other.xmask, self.zmask ^ other.zmask)

    compose = __mul__

    def __imul__(self, other: "PauliOperator") -> "PauliOperator":
        self.xmask ^= other.xmask
        self.zmask ^= other.zmask
        return self

    def symplectic(self, other: "PauliOperator") -> int:
        """0 if the operators commute, 1 if they anticommute."""
        s = np.count_nonzero(self.xmask & other.zmask) + np.count_nonzero(self.zmask & other.xmask)
        return int(s & 1)

    def commutes(self, other: "PauliOperator") -> bool:
        return self.symplectic(other) == 0

    def copy(self) -> "PauliOperator":
        return PauliOperator(self.xmask.copy(), self.zmask.copy())

    def __eq__(self, other):
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return np.array_equal(self.xmask, other.xmask) and np.array_equal(self.zmask, other.zmask)

    def __hash__(self):
        return hash((self.xmask.tobytes(), self.zmask.tobytes()))

    def to_string(self) -> str:
        table = np.array(["I", "X", "Z", "Y"])
        return "".join(table[self.xmask + 2 * self.zmask])

    def __repr__(self):
        if self.n <= 40:
            return f"PauliOperator('{self.to_string()}')"
        return f"PauliOperator(n={self.n}, weight={self.weight})"
