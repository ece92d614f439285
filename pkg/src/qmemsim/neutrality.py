"""Neutrality tests and local annihilation of defect clusters.

Three annihilators are provided:

* ``broom_annihilate``: the linear-time sweep for the cubic code.  Defects are
  swept plane by plane (planes of constant z, starting from the lowest z of
  the box) towards the corner of the box, leaving the plane empty when its
  charge is zero and pushing everything else one plane deeper.
* toric parity pairing: every defect is walked to the corner of its box,
  where an even count annihilates.
* ``solve_in_box``: exact GF(2) solve for an operator on the box's
  1-neighbourhood with the requested syndrome.  Works for any code.

All kernels operate in box-local coordinates: cell ``(i, j, k)`` of a box with
start ``s`` is the global cell ``s + (i, j, k)`` mod L, and local site
``(i, j, k)`` (with ``0 <= i <= extent``) is the global site ``s + (i, j, k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .codes import CUBIC, SECTOR_X, SECTOR_Z, TORIC, CodeDescriptor, DefectSet
from .errors import SectorMismatch
from .geometry import Cluster, PeriodicBox, as3d, axis_lengths, box_from_coords
from .gf2 import _eliminate
from .pauli import PauliOperator

STANDARD = "standard"
SPECIALIZED = "specialized"


@dataclass
class AnnihilationResult:
    """Outcome of an annihilation attempt.

    ``operator`` applied to the system removes the cluster except for
    ``residual``.  In standard mode a charged cluster yields the identity and
    the residual equals the input.
    """

    operator: PauliOperator
    residual: DefectSet
    mode: str = STANDARD

    @property
    def neutral(self) -> bool:
        return self.residual.is_empty()


# ------------------------------------------------------------ move tables

def _footprints3d(code: CodeDescriptor) -> np.ndarray:
    fp = code.footprints
    if fp.shape[-1] == 3:
        return np.ascontiguousarray(fp)
    out = np.zeros(fp.shape[:-1] + (3,), dtype=np.int64)
    out[..., : fp.shape[-1]] = fp
    return out


def _cubic_x_footprints():
    from .codes import _cubic_footprints
    return np.ascontiguousarray(_cubic_footprints()[SECTOR_X])


def _mirror(ops):
    return [((o[1], o[0], o[2]), q) for o, q in ops]


# composite moves of the sweep, as (site offset from the anchor cell, qubit)
_PUSH = [((0, 0, 1), 1)]
_LEFT_WIDE = [((1, -1, 1), 0), ((1, 0, 1), 0), ((1, 0, 1), 1)]
_LEFT_DEEP = [((0, -1, 1), 1), ((0, 0, 1), 0), ((0, 0, 2), 1)]
_CORNER = [((1, 1, 1), 0), ((1, 1, 1), 1)]
_LAST_PLANE = [((0, 0, 0), 0), ((-1, 0, 0), 0), ((0, -1, 0), 0), ((0, 0, 0), 1), ((-1, -1, 0), 1)]
_MOVES = [_PUSH, _LEFT_WIDE, _LEFT_DEEP, _mirror(_LEFT_WIDE), _mirror(_LEFT_DEEP), _CORNER, _LAST_PLANE]
M_PUSH, M_LEFT_WIDE, M_LEFT_DEEP, M_BOTTOM_WIDE, M_BOTTOM_DEEP, M_CORNER, M_LAST = range(7)


def _move_tables():
    fx = _cubic_x_footprints()
    nm = len(_MOVES)
    ops = np.zeros((nm, 5, 4), dtype=np.int64)
    nops = np.zeros(nm, dtype=np.int64)
    cells = np.zeros((nm, 12, 3), dtype=np.int64)
    ncells = np.zeros(nm, dtype=np.int64)
    for m, move in enumerate(_MOVES):
        net = set()
        for k, (site, q) in enumerate(move):
            ops[m, k, :3] = site
            ops[m, k, 3] = q
            for o in fx[q]:
                net ^= {tuple(int(a) for a in np.add(site, o))}
        nops[m] = len(move)
        for k, c in enumerate(sorted(net)):
            cells[m, k] = c
        ncells[m] = len(net)
    return ops, nops, cells, ncells


MOVE_OPS, MOVE_NOPS, MOVE_CELLS, MOVE_NCELLS = _move_tables()


# ------------------------------------------------------------ kernels

@numba.njit(cache=True)
def _apply_move(grid, m, i, j, k, mops, mnops, mcells, mncells, ops, n):
    for c in range(mncells[m]):
        grid[i + mcells[m, c, 0], j + mcells[m, c, 1], k + mcells[m, c, 2]] ^= 1
    for c in range(mnops[m]):
        ops[n, 0] = i + mops[m, c, 0]
        ops[n, 1] = j + mops[m, c, 1]
        ops[n, 2] = k + mops[m, c, 2]
        ops[n, 3] = mops[m, c, 3]
        n += 1
    return n


@numba.njit(cache=True)
def broom_sweep(grid, mops, mnops, mcells, mncells):
    """Sweep X-type defects of a local box grid towards its corner.

    ``grid`` is modified in place and ends holding the residual.  Returns the
    recorded single-qubit Z flips as local ``(i, j, k, q)`` rows, and a flag
    that is 1 when the box is too thin for the line pushers and the caller
    must finish with an exact solve.
    """
    nx, ny, nz = grid.shape
    ops = np.empty((8 * nx * ny * nz + 16, 4), dtype=np.int64)
    n = 0
    z1 = nz - 1
    for z in range(z1):
        for i in range(nx - 1, 0, -1):
            for j in range(ny - 1, 0, -1):
                if grid[i, j, z]:
                    n = _apply_move(grid, 0, i, j, z, mops, mnops, mcells, mncells, ops, n)
        for j in range(ny - 1, 1, -1):
            if grid[0, j, z]:
                if nx >= 2:
                    n = _apply_move(grid, 1, 0, j, z, mops, mnops, mcells, mncells, ops, n)
                elif z + 2 <= z1:
                    n = _apply_move(grid, 2, 0, j, z, mops, mnops, mcells, mncells, ops, n)
                else:
                    return ops[:n], 1
        for i in range(nx - 1, 1, -1):
            if grid[i, 0, z]:
                if ny >= 2:
                    n = _apply_move(grid, 3, i, 0, z, mops, mnops, mcells, mncells, ops, n)
                elif z + 2 <= z1:
                    n = _apply_move(grid, 4, i, 0, z, mops, mnops, mcells, mncells, ops, n)
                else:
                    return ops[:n], 1
        t = ny >= 2 and grid[0, 1, z] != 0
        u = grid[0, 0, z] != 0
        v = nx >= 2 and grid[1, 0, z] != 0
        if t and u and v:
            n = _apply_move(grid, 5, 0, 0, z, mops, mnops, mcells, mncells, ops, n)
        # any other corner pattern carries charge and stays behind
    for i in range(nx - 1, 1, -1):
        for j in range(ny - 1, 1, -1):
            if grid[i, j, z1]:
                n = _apply_move(grid, 6, i, j, z1, mops, mnops, mcells, mncells, ops, n)
    return ops[:n], 0


@numba.njit(cache=True)
def pair_sweep(grid, steps):
    """Walk every defect of a 2D local grid to cell (0, 0).

    ``steps[a]`` = (q, dx, dy): flipping qubit q at site ``c + (dx, dy)``
    toggles cell ``c`` and its neighbour ``c - e_a``.
    """
    nx, ny, nz = grid.shape
    ops = np.empty((nx * ny + 4, 4), dtype=np.int64)
    n = 0
    for i in range(nx - 1, 0, -1):
        for j in range(ny):
            if grid[i, j, 0]:
                grid[i, j, 0] = 0
                grid[i - 1, j, 0] ^= 1
                ops[n, 0] = i + steps[0, 1]
                ops[n, 1] = j + steps[0, 2]
                ops[n, 2] = 0
                ops[n, 3] = steps[0, 0]
                n += 1
    for j in range(ny - 1, 0, -1):
        if grid[0, j, 0]:
            grid[0, j, 0] = 0
            grid[0, j - 1, 0] ^= 1
            ops[n, 0] = steps[1, 1]
            ops[n, 1] = j + steps[1, 2]
            ops[n, 2] = 0
            ops[n, 3] = steps[1, 0]
            n += 1
    return ops[:n]


@numba.njit(cache=True)
def _global_cell(i, j, k, start, Ls):
    x = (start[0] + i) % Ls[0]
    y = (start[1] + j) % Ls[1]
    z = (start[2] + k) % Ls[2]
    return x + Ls[0] * (y + Ls[1] * z)


@numba.njit(cache=True)
def solve_local(defect_cells, start, ext, Ls, fp):
    """Exact GF(2) solve on the 1-neighbourhood of a box.

    Parameters
    ----------
    defect_cells : global indices of the defects (one sector)
    start, ext : box start cell and extents (3D)
    Ls : axis lengths
    fp : (q, f, 3) cell offsets toggled by each qubit type in this sector

    Returns
    -------
    ok : bool
    ops : (n, 4) local site coordinates and qubit type of a solution
    """
    ns = np.empty(3, dtype=np.int64)
    for a in range(3):
        ns[a] = min(ext[a] + 1, Ls[a])
    nq = fp.shape[0]
    nf = fp.shape[1]
    nvar = ns[0] * ns[1] * ns[2] * nq
    ncell_total = Ls[0] * Ls[1] * Ls[2]
    eq_of = np.full(ncell_total, -1, dtype=np.int64)
    var_cells = np.empty((nvar, nf), dtype=np.int64)
    var_site = np.empty((nvar, 4), dtype=np.int64)
    neq = 0
    v = 0
    for k in range(ns[2]):
        for j in range(ns[1]):
            for i in range(ns[0]):
                for q in range(nq):
                    var_site[v, 0] = i
                    var_site[v, 1] = j
                    var_site[v, 2] = k
                    var_site[v, 3] = q
                    for f in range(nf):
                        c = _global_cell(i + fp[q, f, 0], j + fp[q, f, 1], k + fp[q, f, 2], start, Ls)
                        var_cells[v, f] = c
                        if eq_of[c] < 0:
                            eq_of[c] = neq
                            neq += 1
                    v += 1
    for d in range(defect_cells.shape[0]):
        if eq_of[defect_cells[d]] < 0:
            return False, np.empty((0, 4), dtype=np.int64)
    ncol = nvar + 1
    w = (ncol + 63) // 64
    rows = np.zeros((neq, w), dtype=np.uint64)
    for v in range(nvar):
        word = v >> 6
        bit = np.uint64(1) << np.uint64(v & 63)
        for f in range(nf):
            rows[eq_of[var_cells[v, f]], word] ^= bit
    bword = nvar >> 6
    bbit = np.uint64(1) << np.uint64(nvar & 63)
    for d in range(defect_cells.shape[0]):
        rows[eq_of[defect_cells[d]], bword] ^= bbit
    piv = _eliminate(rows, ncol)
    if piv.shape[0] > 0 and piv[-1] == nvar:
        return False, np.empty((0, 4), dtype=np.int64)
    cnt = 0
    for r in range(piv.shape[0]):
        if rows[r, bword] & bbit:
            cnt += 1
    ops = np.empty((cnt, 4), dtype=np.int64)
    cnt = 0
    for r in range(piv.shape[0]):
        if rows[r, bword] & bbit:
            ops[cnt] = var_site[piv[r]]
            cnt += 1
    return True, ops


@numba.njit(cache=True)
def local_ops_to_qubits(ops, start, Ls, mirror, ext, qper):
    """Map local ``(i, j, k, q)`` flips to global qubit indices.

    With ``mirror`` set the local frame is the reflected one used for the
    Z-type sector of the cubic code: site ``i`` maps back to ``ext - i`` and
    qubit ``q`` to ``1 - q``.
    """
    out = np.empty(ops.shape[0], dtype=np.int64)
    for n in range(ops.shape[0]):
        i = ops[n, 0]
        j = ops[n, 1]
        k = ops[n, 2]
        q = ops[n, 3]
        if mirror:
            i = ext[0] - i
            j = ext[1] - j
            k = ext[2] - k
            q = 1 - q
        out[n] = qper * _global_cell(i, j, k, start, Ls) + q
    return out


# ------------------------------------------------------------ sector engine

class SectorEngine:
    """Precomputed tables for annihilating one sector of one code."""

    def __init__(self, code: CodeDescriptor, sector: int):
        self.code = code
        self.sector = sector
        self.Ls = axis_lengths(code.lattice)
        self.fp = _footprints3d(code)[sector]
        self.letter = "Z" if sector == SECTOR_X else "X"
        # cubic Z-type defects are handled by reflecting into the X-type frame
        self.mirror = code.kind == CUBIC and sector == SECTOR_Z
        if code.kind == TORIC:
            self.steps = _pair_steps(self.fp)
        else:
            self.steps = None

    def local_grid(self, coords3d, start, ext):
        grid = np.zeros(tuple(int(e) for e in ext), dtype=np.uint8)
        rel = (coords3d - start) % self.Ls
        if self.mirror:
            rel = np.asarray(ext) - 1 - rel
        grid[rel[:, 0], rel[:, 1], rel[:, 2]] = 1
        return grid

    def annihilate(self, coords3d, start, ext, exact=False):
        """Return (qubits, residual cell indices) for defects inside a box."""
        start = np.asarray(start, dtype=np.int64)
        ext = np.asarray(ext, dtype=np.int64)
        if exact or self.code.kind not in (CUBIC, TORIC):
            return self._solve(coords3d, start, ext)
        grid = self.local_grid(coords3d, start, ext)
        if self.code.kind == TORIC:
            ops = pair_sweep(grid, self.steps)
            thin = 0
        else:
            ops, thin = broom_sweep(grid, MOVE_OPS, MOVE_NOPS, MOVE_CELLS, MOVE_NCELLS)
        qubits = local_ops_to_qubits(ops, start, self.Ls, self.mirror, ext, self.code.lattice.q)
        rest = np.argwhere(grid)
        if self.mirror:
            rest = ext - 1 - rest
        rest_cells = _cells_of(rest + start, self.Ls)
        if thin and len(rest_cells):
            extra, rest_cells = self._solve(self.Ls_coords(rest_cells), start, ext)
            qubits = np.concatenate([qubits, extra])
        return qubits, rest_cells

    def Ls_coords(self, cells):
        Ls = self.Ls
        return np.stack([cells % Ls[0], (cells // Ls[0]) % Ls[1], cells // (Ls[0] * Ls[1])], axis=1)

    def _solve(self, coords3d, start, ext):
        cells = _cells_of(coords3d, self.Ls)
        ok, ops = solve_local(cells, start, ext, self.Ls, self.fp)
        if not ok:
            return np.zeros(0, dtype=np.int64), cells
        qubits = local_ops_to_qubits(ops, start, self.Ls, False, ext, self.code.lattice.q)
        return qubits, np.zeros(0, dtype=np.int64)


def _cells_of(coords3d, Ls):
    c = np.asarray(coords3d, dtype=np.int64) % Ls
    return c[:, 0] + Ls[0] * (c[:, 1] + Ls[1] * c[:, 2])


def _pair_steps(fp):
    # for each axis a: qubit q and site offset d with {c + d + fp[q]} = {c, c - e_a}
    steps = np.zeros((2, 3), dtype=np.int64)
    for a in range(2):
        e = np.zeros(3, dtype=np.int64)
        e[a] = 1
        for q in range(fp.shape[0]):
            o1, o2 = fp[q, 0], fp[q, 1]
            if np.array_equal(o1 - o2, e):
                d = -o1
            elif np.array_equal(o2 - o1, e):
                d = -o2
            else:
                continue
            steps[a] = (q, d[0], d[1])
            break
    return steps


def engine(code: CodeDescriptor, sector: int) -> SectorEngine:
    key = ("engine", sector)
    if key not in code._cache:
        code._cache[key] = SectorEngine(code, sector)
    return code._cache[key]


# ------------------------------------------------------------ public API

def _box3d(B: PeriodicBox):
    start = np.zeros(3, dtype=np.int64)
    ext = np.ones(3, dtype=np.int64)
    start[: len(B.start)] = B.start
    ext[: len(B.extents)] = B.extents
    return start, ext


def _operator(code, sector, qubits) -> PauliOperator:
    letter = "Z" if sector == SECTOR_X else "X"
    return PauliOperator.from_qubits(code.n, qubits, letter)


def _residual(code, sector, cells) -> DefectSet:
    return DefectSet.from_indices(code.lattice, sector, cells)


def broom_annihilate(code: CodeDescriptor, S: DefectSet, B: PeriodicBox, sector: int) -> AnnihilationResult:
    """Sweep one sector of a cubic-code cluster inside box ``B``.

    The recorded operator is returned whether or not the cluster is neutral;
    the residual is empty exactly when it is.

    Raises
    ------
    SectorMismatch
        If ``S`` contains defects of the other sector.
    """
    if code.kind != CUBIC:
        raise ValueError("the sweep is defined for the cubic code only")
    if S.count(1 - sector):
        raise SectorMismatch(f"defects of sector {1 - sector} passed to a sector-{sector} sweep")
    coords = S.coords(sector)
    if len(coords) == 0:
        return AnnihilationResult(PauliOperator.identity(code.n), DefectSet(code.lattice), SPECIALIZED)
    if not B.contains(coords):
        raise ValueError("defects lie outside the box")
    start, ext = _box3d(B)
    qubits, rest = engine(code, sector).annihilate(as3d(coords, 3), start, ext)
    return AnnihilationResult(_operator(code, sector, qubits), _residual(code, sector, rest), SPECIALIZED)


def solve_in_box(code: CodeDescriptor, S: DefectSet, B: PeriodicBox):
    """Operator on the 1-neighbourhood of ``B`` with syndrome exactly ``S``.

    Returns None when no such operator exists.
    """
    op = PauliOperator.identity(code.n)
    start, ext = _box3d(B)
    for sector in (SECTOR_X, SECTOR_Z):
        coords = S.coords(sector)
        if len(coords) == 0:
            continue
        cells = _cells_of(as3d(coords, code.lattice.D), engine(code, sector).Ls)
        ok, ops = solve_local(cells, start, ext, engine(code, sector).Ls, engine(code, sector).fp)
        if not ok:
            return None
        qubits = local_ops_to_qubits(ops, start, engine(code, sector).Ls, False, ext, code.lattice.q)
        op *= _operator(code, sector, qubits)
    return op


def test_neutral(code: CodeDescriptor, C: Cluster, mode: str = STANDARD) -> AnnihilationResult:
    """Decide whether a cluster is neutral and annihilate it if so.

    Boxes wider than ``L_tqo`` are rejected outright.  The cubic code uses the
    sweep, the toric code parity pairing and anything else the exact solve.
    In standard mode a charged cluster gives the identity; in specialized
    mode (cubic code) the recorded sweep is returned regardless.
    """
    S = C.defects
    ident = AnnihilationResult(PauliOperator.identity(code.n), S.copy(), mode)
    if S.is_empty():
        return AnnihilationResult(PauliOperator.identity(code.n), DefectSet(code.lattice), mode)
    B = C.box if C.sector >= 0 else box_from_coords(C.coords(), code.L)
    if B.diameter > code.L_tqo:
        return ident
    start, ext = _box3d(B)
    op = PauliOperator.identity(code.n)
    residual = DefectSet(code.lattice)
    for sector in (SECTOR_X, SECTOR_Z):
        coords = S.coords(sector)
        if len(coords) == 0:
            continue
        qubits, rest = engine(code, sector).annihilate(as3d(coords, code.lattice.D), start, ext)
        op *= _operator(code, sector, qubits)
        residual ^= _residual(code, sector, rest)
    if residual.is_empty() or (mode == SPECIALIZED and code.kind == CUBIC):
        return AnnihilationResult(op, residual, mode)
    return ident


test_neutral.__test__ = False
