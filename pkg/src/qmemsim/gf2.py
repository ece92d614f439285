"""Dense linear algebra over GF(2) on bit-packed rows.

Matrices enter and leave as ``uint8`` arrays of zeros and ones.  Internally
rows are packed little-endian into ``uint64`` words so that a row operation
is a handful of XORs; the elimination loops are compiled with numba.
"""
from __future__ import annotations

import numba
import numpy as np


def pack(M) -> np.ndarray:
    """Pack a 0/1 matrix (or vector) into rows of uint64 words."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8) & 1)
    n, m = M.shape
    w = max(1, (m + 63) // 64)
    padded = np.zeros((n, w * 64), dtype=np.uint8)
    padded[:, :m] = M
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").copy()


def unpack(P: np.ndarray, ncols: int) -> np.ndarray:
    P = np.ascontiguousarray(np.atleast_2d(P), dtype="<u8")
    bits = np.unpackbits(P.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols].astype(np.uint8)


@numba.njit(cache=True)
def _eliminate(rows, ncols):
    # in-place reduced row echelon form; returns pivot column of each leading row
    n = rows.shape[0]
    w = rows.shape[1]
    pivots = np.empty(min(n, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == n:
            break
        word = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        piv = -1
        for i in range(r, n):
            if rows[i, word] & bit:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for k in range(w):
                tmp = rows[r, k]
                rows[r, k] = rows[piv, k]
                rows[piv, k] = tmp
        for i in range(n):
            if i != r and (rows[i, word] & bit):
                for k in range(word, w):
                    rows[i, k] ^= rows[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


@numba.njit(cache=True)
def _reduce_rows(vecs, basis, pivots):
    # reduce each packed vector against a reduced echelon basis, in place
    w = basis.shape[1]
    for v in range(vecs.shape[0]):
        for i in range(pivots.shape[0]):
            c = pivots[i]
            word = c >> 6
            if vecs[v, word] & (np.uint64(1) << np.uint64(c & 63)):
                for k in range(word, w):
                    vecs[v, k] ^= basis[i, k]


def rref(M):
    """Reduced row echelon form.

    Returns
    -------
    R : ndarray of uint8
        The nonzero rows of the reduced form.
    pivots : ndarray of int
        Pivot column of each row of ``R``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    ncols = M.shape[1]
    rows = pack(M)
    piv = _eliminate(rows, ncols)
    return unpack(rows[: len(piv)], ncols), piv


def rank(M) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    if M.size == 0:
        return 0
    return len(_eliminate(pack(M), M.shape[1]))


def nullspace(M) -> np.ndarray:
    """Basis (as rows) of the right kernel ``{v : M v = 0}``."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    ncols = M.shape[1]
    R, piv = rref(M)
    free = np.setdiff1d(np.arange(ncols), piv)
    K = np.zeros((len(free), ncols), dtype=np.uint8)
    K[np.arange(len(free)), free] = 1
    if len(piv):
        # pivot variable = sum of the free variables present in its row
        K[:, piv] = R[:, free].T
    return K


def solve(A, b):
    """One solution ``x`` of ``A x = b``, or None when inconsistent."""
    A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
    b = np.asarray(b, dtype=np.uint8).reshape(-1)
    n, m = A.shape
    if not b.any():
        return np.zeros(m, dtype=np.uint8)
    aug = np.zeros((n, m + 1), dtype=np.uint8)
    aug[:, :m] = A
    aug[:, m] = b
    rows = pack(aug)
    piv = _eliminate(rows, m + 1)
    if len(piv) and piv[-1] == m:
        return None
    R = unpack(rows[: len(piv)], m + 1)
    x = np.zeros(m, dtype=np.uint8)
    x[piv] = R[:, m]
    return x


class RowSpace:
    """Cached reduced basis of a row space, for repeated membership tests."""

    def __init__(self, M):
        M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
        self.ncols = M.shape[1]
        rows = pack(M)
        piv = _eliminate(rows, self.ncols)
        self.basis = np.ascontiguousarray(rows[: len(piv)])
        self.pivots = piv

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v) -> np.ndarray:
        """Canonical representative of ``v`` modulo the row space."""
        P = pack(v)
        _reduce_rows(P, self.basis, self.pivots)
        out = unpack(P, self.ncols)
        return out[0] if np.ndim(v) == 1 else out

    def contains(self, v) -> bool:
        P = pack(v)
        _reduce_rows(P, self.basis, self.pivots)
        return not P.any()

    def extend(self, v) -> bool:
        """Add ``v`` to the space; True if it was independent."""
        P = pack(v)
        _reduce_rows(P, self.basis, self.pivots)
        if not P.any():
            return False
        rows = np.vstack([self.basis, P])
        piv = _eliminate(rows, self.ncols)
        self.basis = np.ascontiguousarray(rows[: len(piv)])
        self.pivots = piv
        return True
