"""Hierarchical renormalization-group decoder.

At level ``p`` the syndrome is split into 2**p-connected components, and each
component whose enclosing box fits within ``L_tqo`` is handed to the
neutrality test.  Levels run from 0 to ``p_max(code)``; the decode succeeds
when no defect survives the last level.  The two sectors are decoded
independently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CUBIC, SECTOR_X, SECTOR_Z, CodeDescriptor, DefectSet, syndrome
from .geometry import enclosing_interval, label_components
from .neutrality import SPECIALIZED, STANDARD, engine
from .pauli import PauliOperator

SUCCESS = "success"
FAILURE = "failure"


def p_max(code: CodeDescriptor) -> int:
    """Largest p with ``2**p < min(L/2, L_tqo)``; -1 when no level qualifies."""
    bound = min(code.L / 2, code.L_tqo)
    p = -1
    while 2 ** (p + 1) < bound:
        p += 1
    return p


@dataclass
class LevelTrace:
    p: int
    examined: int = 0
    annihilated: int = 0
    boxes: list = field(default_factory=list)  # (sector, start, extents, verdict)

    def as_tuple(self):
        return (self.p, self.examined, self.annihilated)


@dataclass
class DecodeOutcome:
    verdict: str
    correction: PauliOperator
    trace: list
    residual: DefectSet

    @property
    def success(self) -> bool:
        return self.verdict == SUCCESS

    def trace_lines(self) -> list:
        """One text line per examined cluster, then one summary line per level."""
        lines = []
        for lev in self.trace:
            for sector, start, ext, verdict in lev.boxes:
                lines.append(f"level={lev.p} sector={sector} box_start={list(start)} "
                             f"box_extents={list(ext)} verdict={verdict}")
            lines.append(f"level={lev.p} examined={lev.examined} annihilated={lev.annihilated}")
        return lines


def _level_sector(code, sector, bits, r, mode, lev: LevelTrace | None, log=False):
    """One level of correction on one sector; mutates ``bits``, returns qubits."""
    eng = engine(code, sector)
    cells = np.flatnonzero(bits)
    if len(cells) == 0:
        return []
    coords = eng.Ls_coords(cells)
    labels, ncomp = label_components(coords, eng.Ls, r)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    keep_charged = mode == SPECIALIZED and code.kind == CUBIC
    D = code.lattice.D
    flips = []
    start = np.zeros(3, dtype=np.int64)
    ext = np.ones(3, dtype=np.int64)
    for c in range(ncomp):
        idx = order[bounds[c]:bounds[c + 1]]
        cc = coords[idx]
        for a in range(D):
            s, e, _ = enclosing_interval(cc[:, a], code.L)
            start[a] = s
            ext[a] = e
        if lev is not None:
            lev.examined += 1
        if ext.max() - 1 > code.L_tqo:
            if log:
                lev.boxes.append((sector, start[:D].tolist(), ext[:D].tolist(), "too-large"))
            continue
        qubits, rest = eng.annihilate(cc, start, ext)
        if len(rest) and not keep_charged:
            if log:
                lev.boxes.append((sector, start[:D].tolist(), ext[:D].tolist(), "charged"))
            continue
        bits[cells[idx]] ^= 1
        if len(rest):
            np.bitwise_xor.at(bits, rest, 1)
        flips.append(qubits)
        if lev is not None and len(rest) == 0:
            lev.annihilated += 1
        if log:
            lev.boxes.append((sector, start[:D].tolist(), ext[:D].tolist(),
                              "neutral" if len(rest) == 0 else "swept"))
    return flips


def _apply_flips(op: PauliOperator, sector: int, flips):
    if not flips:
        return
    q = np.concatenate(flips)
    if len(q) == 0:
        return
    mask = (np.bincount(q, minlength=op.n) & 1).astype(np.uint8)
    if sector == SECTOR_X:
        op.zmask ^= mask
    else:
        op.xmask ^= mask


def ec_level(code: CodeDescriptor, S: DefectSet, p: int, mode: str = STANDARD, *, _trace=None):
    """Error correction at scale ``2**p``.

    Returns
    -------
    (PauliOperator, DefectSet)
        The product of the annihilating operators and the updated syndrome.
    """
    bits = S.bits.copy()
    op = PauliOperator.identity(code.n)
    lev = _trace if _trace is not None else LevelTrace(p)
    for sector in (SECTOR_X, SECTOR_Z):
        flips = _level_sector(code, sector, bits[sector], 2 ** p, mode, lev)
        _apply_flips(op, sector, flips)
    return op, DefectSet(code.lattice, bits)


def rg_decode(code: CodeDescriptor, S: DefectSet, mode: str = STANDARD, *, log: bool = False,
              check: bool = False) -> DecodeOutcome:
    """Run the decoder for levels 0..p_max and report the verdict.

    The input syndrome is never modified.  With ``check=True`` the
    bookkeeping ``syndrome(correction) xor S == residual`` is asserted after
    every level.
    """
    bits = S.bits.copy()
    correction = PauliOperator.identity(code.n)
    trace = []
    for p in range(p_max(code) + 1):
        lev = LevelTrace(p)
        for sector in (SECTOR_X, SECTOR_Z):
            flips = _level_sector(code, sector, bits[sector], 2 ** p, mode, lev, log)
            _apply_flips(correction, sector, flips)
        trace.append(lev)
        if check:
            assert np.array_equal(syndrome(code, correction).bits ^ S.bits, bits), "syndrome bookkeeping broken"
    residual = DefectSet(code.lattice, bits)
    verdict = SUCCESS if residual.is_empty() else FAILURE
    return DecodeOutcome(verdict, correction, trace, residual)


def decode_sector(code: CodeDescriptor, sector: int, cells, mode: str = STANDARD):
    """Lean decode of a single sector given defect cell indices.

    Returns ``(success, flipped_qubits)`` where the qubit array may contain
    repeats (a qubit flipped an even number of times is not flipped).
    """
    bits = np.zeros(code.ncells, dtype=np.uint8)
    bits[np.asarray(cells, dtype=np.int64)] = 1
    allflips = []
    for p in range(p_max(code) + 1):
        if not bits.any():
            break
        allflips.extend(_level_sector(code, sector, bits, 2 ** p, mode, None))
    q = np.concatenate(allflips) if allflips else np.zeros(0, dtype=np.int64)
    return not bits.any(), q
