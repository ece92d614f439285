"""Lattices, stabilizer generators, syndromes and logical operators.

Two codes are provided: the 3D cubic code (two qubits per site of a periodic
L x L x L lattice, one X-type and one Z-type generator per unit cube) and the
2D toric code (one qubit per edge, stored as two qubits per site).

Indexing
--------
Sites are numbered with x fastest, ``site = x + L*(y + L*z)``, and qubit
``q`` of a site has index ``2*site + q``.  Generators live on cells (cubes or
squares) indexed the same way by their base corner.  Sector 0 holds the
X-type generators, which detect Z errors; sector 1 holds the Z-type
generators, which detect X errors.
"""
from __future__ import annotations

import functools

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .errors import DegenerateCodeSpace, InvalidSize, OutOfValidatedRange
from .pauli import PauliOperator

CUBIC = "cubic3d"
TORIC = "toric2d"
SECTOR_X, SECTOR_Z = 0, 1
SECTOR_NAMES = ("X-type", "Z-type")

# cube vertex offsets for labels 1..8 and the two-letter patterns on them
CUBE_VERTICES = [(0, 1, 0), (1, 1, 0), (0, 0, 0), (1, 0, 0),
                 (1, 0, 1), (0, 0, 1), (1, 1, 1), (0, 1, 1)]
GZ_PATTERN = ["ZI", "ZZ", "IZ", "ZI", "IZ", "II", "ZI", "IZ"]
GX_PATTERN = ["XI", "II", "IX", "XI", "IX", "XX", "XI", "IX"]


def _cubic_footprints():
    # fp[sector][q] = cube offsets toggled by flipping qubit q of a site
    fp = []
    for pattern, letter in ((GX_PATTERN, "X"), (GZ_PATTERN, "Z")):
        per_q = []
        for q in (0, 1):
            per_q.append([tuple(-c for c in v) for v, lab in zip(CUBE_VERTICES, pattern)
                          if lab[q] == letter])
        fp.append(per_q)
    return np.array(fp, dtype=np.int64)


# toric: q0 = horizontal edge (x, y)-(x+1, y), q1 = vertical edge (x, y)-(x, y+1).
# Plaquettes sit at their lower-left corner; the star of vertex v is stored at v - (1, 1).
_TORIC_FOOTPRINTS = np.array([
    [[(0, 0), (0, -1)], [(0, 0), (-1, 0)]],
    [[(-1, -1), (0, -1)], [(-1, -1), (-1, 0)]],
], dtype=np.int64)


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic hypercubic lattice with ``q`` qubits per site."""

    D: int
    L: int
    q: int = 2

    def __post_init__(self):
        if self.L < 3:
            raise InvalidSize(f"L must be at least 3, got {self.L}")
        if self.D not in (2, 3):
            raise ValueError("dimension must be 2 or 3")

    @property
    def nsites(self) -> int:
        return self.L ** self.D

    @property
    def ncells(self) -> int:
        return self.L ** self.D

    @property
    def nqubits(self) -> int:
        return self.q * self.nsites

    def index(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64) % self.L
        mult = 1
        idx = np.zeros(c.shape[:-1], dtype=np.int64)
        for a in range(self.D):
            idx += c[..., a] * mult
            mult *= self.L
        return idx

    def coords(self, index) -> np.ndarray:
        i = np.asarray(index, dtype=np.int64)
        out = np.empty(i.shape + (self.D,), dtype=np.int64)
        for a in range(self.D):
            out[..., a] = i % self.L
            i = i // self.L
        return out


class DefectSet:
    """Set of flipped generators, stored as a (2, ncells) bit array.

    Symmetric difference (``^``) is the group operation and ``len`` is the
    defect count, which is also the energy.
    """

    __slots__ = ("lattice", "bits")

    def __init__(self, lattice: LatticeSpec, bits=None):
        self.lattice = lattice
        if bits is None:
            bits = np.zeros((2, lattice.ncells), dtype=np.uint8)
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (2, lattice.ncells):
            raise ValueError("defect bit array has wrong shape")
        self.bits = bits

    @classmethod
    def from_cells(cls, lattice: LatticeSpec, items: Iterable) -> "DefectSet":
        """Build from ``(coords, sector)`` pairs; repeated entries cancel."""
        S = cls(lattice)
        for coords, sector in items:
            S.bits[sector, int(lattice.index(coords))] ^= 1
        return S

    @classmethod
    def from_indices(cls, lattice: LatticeSpec, sector: int, cells) -> "DefectSet":
        S = cls(lattice)
        np.bitwise_xor.at(S.bits[sector], np.asarray(cells, dtype=np.int64), 1)
        return S

    def copy(self) -> "DefectSet":
        return DefectSet(self.lattice, self.bits.copy())

    def __len__(self):
        return int(np.count_nonzero(self.bits))

    def __bool__(self):
        return bool(self.bits.any())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def __xor__(self, other: "DefectSet") -> "DefectSet":
        return DefectSet(self.lattice, self.bits ^ other.bits)

    def __ixor__(self, other: "DefectSet") -> "DefectSet":
        self.bits ^= other.bits
        return self

    def __eq__(self, other):
        if not isinstance(other, DefectSet):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.bits, other.bits)

    def __contains__(self, item):
        coords, sector = item
        return bool(self.bits[sector, int(self.lattice.index(coords))])

    def cells(self, sector: int) -> np.ndarray:
        return np.flatnonzero(self.bits[sector])

    def coords(self, sector: int) -> np.ndarray:
        """Integer base corners (shape ``(m, D)``) of the defects in a sector."""
        return self.lattice.coords(self.cells(sector))

    def centers(self, sector: int) -> np.ndarray:
        return self.coords(sector) + 0.5

    def restrict(self, sector: int) -> "DefectSet":
        S = DefectSet(self.lattice)
        S.bits[sector] = self.bits[sector]
        return S

    def count(self, sector: int | None = None) -> int:
        if sector is None:
            return len(self)
        return int(np.count_nonzero(self.bits[sector]))

    def items(self) -> list:
        return [(tuple(int(v) for v in c), s) for s in (0, 1) for c in self.coords(s)]

    def __repr__(self):
        return f"DefectSet(L={self.lattice.L}, X-type={self.count(0)}, Z-type={self.count(1)})"


@dataclass(frozen=True)
class Generator:
    cell: tuple
    sector: int
    operator: PauliOperator


class _GeneratorList(Sequence):
    # generators are materialised on demand; sector 0 cells first
    def __init__(self, code: "CodeDescriptor"):
        self._code = code

    def __len__(self):
        return 2 * self._code.lattice.ncells

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError(i)
        sector, cell = divmod(i, self._code.lattice.ncells)
        return Generator(tuple(int(v) for v in self._code.lattice.coords(cell)), sector,
                         self._code.generator_operator(sector, cell))


@dataclass(frozen=True, eq=False)
class CodeDescriptor:
    """A translation-invariant CSS code on a periodic lattice.

    Attributes
    ----------
    kind : str
        ``"cubic3d"`` or ``"toric2d"``.
    lattice : LatticeSpec
    footprints : ndarray, shape (2, q, f, D)
        ``footprints[s, q]`` lists the cell offsets (relative to the site)
        of sector-``s`` generators toggled by flipping qubit ``q``.
    L_tqo : int
        Box size below which syndrome-free operators are stabilizers.
    alpha : int or None
        No-strings constant.
    """

    kind: str
    lattice: LatticeSpec
    footprints: np.ndarray
    L_tqo: int
    alpha: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def L(self) -> int:
        return self.lattice.L

    @property
    def n(self) -> int:
        return self.lattice.nqubits

    @property
    def ncells(self) -> int:
        return self.lattice.ncells

    @property
    def generators(self) -> _GeneratorList:
        return _GeneratorList(self)

    @cached_property
    def flip_cells(self) -> np.ndarray:
        """``flip_cells[s, i]``: sector-``s`` cells toggled by qubit ``i``."""
        lat = self.lattice
        sites = lat.coords(np.arange(lat.nsites))
        nfp = self.footprints.shape[2]
        out = np.empty((2, lat.nqubits, nfp), dtype=np.int64)
        for s in range(2):
            for q in range(lat.q):
                for k in range(nfp):
                    out[s, q::lat.q, k] = lat.index(sites + self.footprints[s, q, k])
        out.setflags(write=False)
        return out

    @cached_property
    def generator_qubits(self) -> np.ndarray:
        """``generator_qubits[s, c]``: qubits in the support of generator (s, c)."""
        lat = self.lattice
        cells = lat.coords(np.arange(lat.ncells))
        nfp = self.footprints.shape[2]
        out = np.empty((2, lat.ncells, lat.q * nfp), dtype=np.int64)
        for s in range(2):
            col = 0
            for q in range(lat.q):
                for k in range(nfp):
                    out[s, :, col] = lat.q * lat.index(cells - self.footprints[s, q, k]) + q
                    col += 1
        out.setflags(write=False)
        return out

    def generator_operator(self, sector: int, cell: int) -> PauliOperator:
        letter = "X" if sector == SECTOR_X else "Z"
        return PauliOperator.from_qubits(self.n, self.generator_qubits[sector, cell], letter)

    def check_matrix(self, sector: int) -> np.ndarray:
        """Dense 0/1 matrix whose rows are the sector's generator supports."""
        key = ("H", sector)
        if key not in self._cache:
            H = np.zeros((self.ncells, self.n), dtype=np.uint8)
            rows = np.repeat(np.arange(self.ncells), self.generator_qubits.shape[2])
            np.bitwise_xor.at(H, (rows, self.generator_qubits[sector].ravel()), 1)
            H.setflags(write=False)
            self._cache[key] = H
        return self._cache[key]

    def rowspace(self, sector: int) -> gf2.RowSpace:
        key = ("R", sector)
        if key not in self._cache:
            self._cache[key] = gf2.RowSpace(self.check_matrix(sector))
        return self._cache[key]

    def cell_syndrome(self, sector: int, qubit_mask) -> np.ndarray:
        """Parity of sector cells toggled by the qubits set in ``qubit_mask``."""
        hits = self.flip_cells[sector][np.flatnonzero(qubit_mask)].ravel()
        return (np.bincount(hits, minlength=self.ncells) & 1).astype(np.uint8)

    def __repr__(self):
        return f"CodeDescriptor({self.kind}, L={self.L}, n={self.n})"


def build_code(kind: str, L: int, L_tqo: int | None = None) -> CodeDescriptor:
    """Construct the cubic or toric code on a periodic lattice of size ``L``.

    ``L_tqo`` defaults to ``L // 2``; a different scale only changes which
    boxes the decoder is willing to treat as local.

    Raises
    ------
    InvalidSize
        If ``L < 3``.
    """
    if L < 3:
        raise InvalidSize(f"L must be at least 3, got {L}")
    scale = L // 2 if L_tqo is None else int(L_tqo)
    if kind == CUBIC:
        return CodeDescriptor(CUBIC, LatticeSpec(3, L, 2), _cubic_footprints(), scale, 5)
    if kind == TORIC:
        return CodeDescriptor(TORIC, LatticeSpec(2, L, 2), _TORIC_FOOTPRINTS.copy(), scale, None)
    raise ValueError(f"unknown code kind {kind!r}")


@functools.lru_cache(maxsize=16)
def shared_code(kind: str, L: int) -> CodeDescriptor:
    """Cached default-scale code, reused across samples of one process."""
    return build_code(kind, L)


def validate_lattice_size(L: int) -> bool:
    """True when the cubic code on size ``L`` is certified to encode two qubits."""
    if L < 3:
        raise InvalidSize(f"L must be at least 3, got {L}")
    if L > 200:
        raise OutOfValidatedRange(f"two-qubit criterion is only established for L <= 200, got {L}")
    return L % 2 == 1 and L % 15 != 0 and L % 63 != 0


def syndrome(code: CodeDescriptor, P: PauliOperator) -> DefectSet:
    """Defects flipped by ``P``: Z parts hit sector 0, X parts hit sector 1."""
    if P.n != code.n:
        raise ValueError("operator size does not match code")
    bits = np.stack([code.cell_syndrome(SECTOR_X, P.zmask), code.cell_syndrome(SECTOR_Z, P.xmask)])
    return DefectSet(code.lattice, bits)


@dataclass(frozen=True)
class LogicalBasis:
    """Paired logical representatives with ``X[i] . Z[j] = delta_ij``."""

    X: tuple
    Z: tuple
    k: int
    validated: bool = True

    @property
    def operators(self) -> list:
        return [op for pair in zip(self.X, self.Z) for op in pair]

    def __len__(self):
        return 2 * self.k


def _inverse_gf2(M: np.ndarray) -> np.ndarray:
    k = M.shape[0]
    R, piv = gf2.rref(np.hstack([M, np.eye(k, dtype=np.uint8)]))
    if len(piv) < k or piv[k - 1] >= k:
        raise DegenerateCodeSpace("logical pairing matrix is singular")
    return R[:, k:]


def _logical_reps(code: CodeDescriptor, kernel_of: int, modulo: int) -> np.ndarray:
    K = gf2.nullspace(code.check_matrix(kernel_of))
    R = code.rowspace(modulo)
    packed = gf2.pack(K)
    gf2._reduce_rows(packed, R.basis, R.pivots)
    residues = gf2.unpack(packed, code.n)
    residues = residues[residues.any(axis=1)]
    if len(residues) == 0:
        return np.zeros((0, code.n), dtype=np.uint8)
    reps, _ = gf2.rref(residues)
    return reps


def logical_basis(code: CodeDescriptor) -> LogicalBasis:
    """Compute paired X-type and Z-type logical representatives.

    X-type logicals are X operators commuting with every Z-type generator
    and outside the X-type generator span; Z-type ones are the mirror image.
    The Z representatives are then recombined so that the pairing matrix is
    the identity.

    Raises
    ------
    DegenerateCodeSpace
        When the computed k differs from the expected value (two for the toric
        code and for validated cubic sizes).
    """
    if "logical" in code._cache:
        return code._cache["logical"]
    Xr = _logical_reps(code, SECTOR_Z, SECTOR_X)
    Zr = _logical_reps(code, SECTOR_X, SECTOR_Z)
    k = len(Xr)
    if len(Zr) != k:
        raise DegenerateCodeSpace(f"X and Z logical counts differ ({k} vs {len(Zr)})")
    if code.kind == TORIC:
        expected, validated = 2, True
    else:
        try:
            validated = validate_lattice_size(code.L)
        except OutOfValidatedRange:
            validated = False
        expected = 2 if validated else k
    if k != expected:
        raise DegenerateCodeSpace(f"computed k={k}, expected {expected}")
    if k:
        M = (Xr.astype(np.int64) @ Zr.T.astype(np.int64) % 2).astype(np.uint8)
        A = _inverse_gf2(M).T
        Zr = (A.astype(np.int64) @ Zr.astype(np.int64) % 2).astype(np.uint8)
    zero = np.zeros(code.n, dtype=np.uint8)
    basis = LogicalBasis(tuple(PauliOperator(x, zero) for x in Xr),
                         tuple(PauliOperator(zero, z) for z in Zr), k, validated)
    code._cache["logical"] = basis
    return basis


STABILIZER = "stabilizer"
LOGICAL = "nontrivial-logical"
DETECTABLE = "detectable"


def _logical_matrices(code: CodeDescriptor):
    if "logical_mats" not in code._cache:
        B = logical_basis(code)
        zero = np.zeros((0, code.n), dtype=np.uint8)
        Xs = np.array([op.xmask for op in B.X], dtype=np.uint8) if B.k else zero
        Zs = np.array([op.zmask for op in B.Z], dtype=np.uint8) if B.k else zero
        code._cache["logical_mats"] = (Xs, Zs)
    return code._cache["logical_mats"]


def logical_action(code: CodeDescriptor, P: PauliOperator) -> np.ndarray:
    """Commutation bits of ``P`` with (X_1, Z_1, X_2, Z_2, ...)."""
    Xs, Zs = _logical_matrices(code)
    with_x = Xs.astype(np.int64) @ P.zmask.astype(np.int64) % 2
    with_z = Zs.astype(np.int64) @ P.xmask.astype(np.int64) % 2
    return np.ravel(np.column_stack([with_x, with_z])).astype(np.uint8)


def classify(code: CodeDescriptor, P: PauliOperator) -> str:
    """Return ``"stabilizer"``, ``"nontrivial-logical"`` or ``"detectable"``."""
    if not syndrome(code, P).is_empty():
        return DETECTABLE
    if logical_action(code, P).any():
        return LOGICAL
    if code.rowspace(SECTOR_X).contains(P.xmask) and code.rowspace(SECTOR_Z).contains(P.zmask):
        return STABILIZER
    return LOGICAL
