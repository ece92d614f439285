"""Periodic l-infinity geometry: distances, r-connected components, enclosing boxes.

Defects are identified with the integer base corner of their cell; the cell
center is that corner plus one half on every axis.  All kernels work in three
dimensions; a 2D lattice is handled as a 3D one with a single z layer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .codes import DefectSet, LatticeSpec
from .errors import AmbiguousBox


def distance(u, v, L: int) -> int:
    """Wrapped l-infinity distance between two cells (or cell centers)."""
    d = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float)) % L
    d = np.minimum(d, L - d)
    return int(round(float(d.max()))) if d.size else 0


def axis_lengths(lattice: LatticeSpec) -> np.ndarray:
    Ls = np.ones(3, dtype=np.int64)
    Ls[: lattice.D] = lattice.L
    return Ls


def as3d(coords, D: int) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, D)
    if D == 3:
        return np.ascontiguousarray(coords)
    out = np.zeros((coords.shape[0], 3), dtype=np.int64)
    out[:, :D] = coords
    return out


# ---------------------------------------------------------------- components

@numba.njit(cache=True)
def _axis_relations(L, r, nb):
    # per box along one axis: candidate partner boxes (partner, gap, direction)
    # with direction 0 for the box itself, +1 forward, -1 backward
    rel = np.zeros((nb, 8, 3), dtype=np.int64)
    cnt = np.zeros(nb, dtype=np.int64)
    for b in range(nb):
        lo = b * r
        hi = min((b + 1) * r, L)
        rel[b, 0, 0] = b
        cnt[b] = 1
        for b2 in range(nb):
            if b2 == b:
                continue
            lo2 = b2 * r
            hi2 = min((b2 + 1) * r, L)
            gf = (lo2 - hi) % L
            if gf + 1 <= r and cnt[b] < 8:
                rel[b, cnt[b], 0] = b2
                rel[b, cnt[b], 1] = gf
                rel[b, cnt[b], 2] = 1
                cnt[b] += 1
            gb = (lo - hi2) % L
            if gb + 1 <= r and cnt[b] < 8:
                rel[b, cnt[b], 0] = b2
                rel[b, cnt[b], 1] = gb
                rel[b, cnt[b], 2] = -1
                cnt[b] += 1
    return rel, cnt


@numba.njit(cache=True)
def _box_pair_close(coords, order, start, A, Bx, blo, bhi, clo, chi, gaps, dirs, r):
    # True if some defect of box A and some defect of box Bx are within r.
    # Per active axis the distance is t(u) + gap + 1 + s(v), where t and s
    # measure how far each point sits from the facing sides of the two boxes.
    lim = np.empty(3, dtype=np.int64)
    dims = np.ones(3, dtype=np.int64)
    for a in range(3):
        if dirs[a] != 0:
            lim[a] = r - 1 - gaps[a]
            dims[a] = lim[a] + 1
        else:
            lim[a] = 0
    na = start[A + 1] - start[A]
    nbx = start[Bx + 1] - start[Bx]
    tsize = dims[0] * dims[1] * dims[2]
    tu = np.zeros(3, dtype=np.int64)
    sv = np.zeros(3, dtype=np.int64)
    if na * nbx <= tsize:
        for ii in range(start[A], start[A + 1]):
            u = order[ii]
            for a in range(3):
                if dirs[a] == 1:
                    tu[a] = bhi[a] - 1 - coords[u, a]
                elif dirs[a] == -1:
                    tu[a] = coords[u, a] - blo[a]
            for jj in range(start[Bx], start[Bx + 1]):
                v = order[jj]
                ok = True
                for a in range(3):
                    if dirs[a] == 1:
                        s = coords[v, a] - clo[a]
                    elif dirs[a] == -1:
                        s = chi[a] - 1 - coords[v, a]
                    else:
                        continue
                    if tu[a] + s > lim[a]:
                        ok = False
                        break
                if ok:
                    return True
        return False
    # cumulative table: T[i,j,k] = some u has t(u) <= (i,j,k) componentwise
    T = np.zeros((dims[0], dims[1], dims[2]), dtype=np.uint8)
    for ii in range(start[A], start[A + 1]):
        u = order[ii]
        inside = True
        for a in range(3):
            if dirs[a] == 1:
                tu[a] = bhi[a] - 1 - coords[u, a]
            elif dirs[a] == -1:
                tu[a] = coords[u, a] - blo[a]
            else:
                tu[a] = 0
            if tu[a] > lim[a]:
                inside = False
        if inside:
            T[tu[0], tu[1], tu[2]] = 1
    for i in range(dims[0]):
        for j in range(dims[1]):
            for k in range(dims[2]):
                v = T[i, j, k]
                if i > 0 and T[i - 1, j, k]:
                    v = 1
                if j > 0 and T[i, j - 1, k]:
                    v = 1
                if k > 0 and T[i, j, k - 1]:
                    v = 1
                T[i, j, k] = v
    for jj in range(start[Bx], start[Bx + 1]):
        v = order[jj]
        inside = True
        for a in range(3):
            if dirs[a] == 1:
                sv[a] = lim[a] - (coords[v, a] - clo[a])
            elif dirs[a] == -1:
                sv[a] = lim[a] - (chi[a] - 1 - coords[v, a])
            else:
                sv[a] = 0
            if sv[a] < 0:
                inside = False
        if inside and T[sv[0], sv[1], sv[2]]:
            return True
    return False


@numba.njit(cache=True)
def label_components(coords, Ls, r):
    """Label r-connected components of defects by box tiling and flood fill.

    Parameters
    ----------
    coords : (m, 3) int64 array of cell coordinates, reduced mod ``Ls``
    Ls : (3,) int64 axis lengths
    r : int, connection scale

    Returns
    -------
    labels : (m,) int64, component label per defect, numbered in scan order
    ncomp : int
    """
    m = coords.shape[0]
    labels = np.full(m, -1, dtype=np.int64)
    if m == 0:
        return labels, 0
    everything = True
    for a in range(3):
        if Ls[a] // 2 > r:
            everything = False
    if everything:
        labels[:] = 0
        return labels, 1
    nb = np.empty(3, dtype=np.int64)
    for a in range(3):
        nb[a] = (Ls[a] + r - 1) // r
    nbox = nb[0] * nb[1] * nb[2]
    boxid = np.empty(m, dtype=np.int64)
    for i in range(m):
        boxid[i] = (coords[i, 0] // r) + nb[0] * ((coords[i, 1] // r) + nb[1] * (coords[i, 2] // r))
    start = np.zeros(nbox + 1, dtype=np.int64)
    for i in range(m):
        start[boxid[i] + 1] += 1
    for b in range(nbox):
        start[b + 1] += start[b]
    fill = start[:-1].copy()
    order = np.empty(m, dtype=np.int64)
    for i in range(m):
        order[fill[boxid[i]]] = i
        fill[boxid[i]] += 1
    rx, cx = _axis_relations(Ls[0], r, nb[0])
    ry, cy = _axis_relations(Ls[1], r, nb[1])
    rz, cz = _axis_relations(Ls[2], r, nb[2])
    boxlabel = np.full(nbox, -1, dtype=np.int64)
    queue = np.empty(nbox, dtype=np.int64)
    gaps = np.zeros(3, dtype=np.int64)
    dirs = np.zeros(3, dtype=np.int64)
    blo = np.zeros(3, dtype=np.int64)
    bhi = np.zeros(3, dtype=np.int64)
    clo = np.zeros(3, dtype=np.int64)
    chi = np.zeros(3, dtype=np.int64)
    ncomp = 0
    for B0 in range(nbox):
        if start[B0 + 1] == start[B0] or boxlabel[B0] >= 0:
            continue
        boxlabel[B0] = ncomp
        head = 0
        tail = 1
        queue[0] = B0
        while head < tail:
            cur = queue[head]
            head += 1
            b0 = cur % nb[0]
            b1 = (cur // nb[0]) % nb[1]
            b2 = cur // (nb[0] * nb[1])
            bb = (b0, b1, b2)
            for a in range(3):
                blo[a] = bb[a] * r
                bhi[a] = min((bb[a] + 1) * r, Ls[a])
            for k0 in range(cx[b0]):
                for k1 in range(cy[b1]):
                    for k2 in range(cz[b2]):
                        n0 = rx[b0, k0, 0]
                        n1 = ry[b1, k1, 0]
                        n2 = rz[b2, k2, 0]
                        nbr = n0 + nb[0] * (n1 + nb[1] * n2)
                        if nbr == cur or boxlabel[nbr] >= 0 or start[nbr + 1] == start[nbr]:
                            continue
                        gaps[0] = rx[b0, k0, 1]
                        gaps[1] = ry[b1, k1, 1]
                        gaps[2] = rz[b2, k2, 1]
                        dirs[0] = rx[b0, k0, 2]
                        dirs[1] = ry[b1, k1, 2]
                        dirs[2] = rz[b2, k2, 2]
                        nn = (n0, n1, n2)
                        for a in range(3):
                            clo[a] = nn[a] * r
                            chi[a] = min((nn[a] + 1) * r, Ls[a])
                        if _box_pair_close(coords, order, start, cur, nbr, blo, bhi, clo, chi,
                                           gaps, dirs, r):
                            boxlabel[nbr] = ncomp
                            queue[tail] = nbr
                            tail += 1
        ncomp += 1
    for i in range(m):
        labels[i] = boxlabel[boxid[i]]
    return labels, ncomp


@numba.njit(cache=True)
def label_components_pairwise(coords, Ls, r):
    """Quadratic reference labelling by union-find over all close pairs."""
    m = coords.shape[0]
    parent = np.arange(m)
    for i in range(m):
        for j in range(i + 1, m):
            d = 0
            for a in range(3):
                x = abs(coords[i, a] - coords[j, a]) % Ls[a]
                x = min(x, Ls[a] - x)
                d = max(d, x)
            if d <= r:
                ri = i
                while parent[ri] != ri:
                    ri = parent[ri]
                rj = j
                while parent[rj] != rj:
                    rj = parent[rj]
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    labels = np.empty(m, dtype=np.int64)
    for i in range(m):
        ri = i
        while parent[ri] != ri:
            ri = parent[ri]
        labels[i] = ri
    return labels


# ---------------------------------------------------------------- boxes

@numba.njit(cache=True)
def enclosing_interval(xs, L):
    """Shortest circular interval covering ``xs``.

    Returns ``(start, extent, tied)`` where the interval is the complement of
    the longest gap between consecutive occupied coordinates.  Ties go to the
    smallest start coordinate.
    """
    v = np.unique(xs % L)
    n = v.shape[0]
    best_gap = -1
    best_start = 0
    tied = False
    for i in range(n):
        nxt = v[(i + 1) % n]
        g = (nxt - v[i]) % L
        if g == 0:
            g = L
        if g > best_gap:
            best_gap = g
            best_start = nxt
            tied = False
        elif g == best_gap:
            tied = True
            if nxt < best_start:
                best_start = nxt
    return best_start, L - best_gap + 1, tied


@dataclass(frozen=True)
class PeriodicBox:
    """Axis-aligned box of cells on the torus.

    ``start`` holds the integer corner of the first cell on each axis and
    ``extents`` the number of cells; the box vertices (cell centers) sit at
    ``corner = start + 1/2``.  The diameter is the l-infinity span between
    the outermost cell centers, ``max(extents) - 1``.
    """

    start: tuple
    extents: tuple
    L: int
    ambiguous: bool = False

    @property
    def corner(self) -> tuple:
        return tuple(s + 0.5 for s in self.start)

    @property
    def diameter(self) -> int:
        return max(self.extents) - 1

    @property
    def volume(self) -> int:
        return int(np.prod(self.extents))

    def contains(self, coords) -> bool:
        c = np.asarray(coords, dtype=np.int64).reshape(-1, len(self.start))
        rel = (c - np.asarray(self.start)) % self.L
        return bool(np.all(rel < np.asarray(self.extents)))

    def cells(self) -> np.ndarray:
        axes = [(s + np.arange(e)) % self.L for s, e in zip(self.start, self.extents)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)

    def neighborhood_sites(self) -> np.ndarray:
        """Sites of the 1-neighbourhood: every vertex of every cell in the box."""
        axes = [np.unique((s + np.arange(min(e + 1, self.L))) % self.L)
                for s, e in zip(self.start, self.extents)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)


def box_from_coords(coords, L: int, strict: bool = False) -> PeriodicBox:
    coords = np.asarray(coords, dtype=np.int64)
    if coords.ndim != 2 or len(coords) == 0:
        raise ValueError("need a nonempty (m, D) coordinate array")
    start, ext, amb = [], [], False
    for a in range(coords.shape[1]):
        s, e, t = enclosing_interval(coords[:, a], L)
        start.append(int(s))
        ext.append(int(e))
        amb = amb or bool(t)
    box = PeriodicBox(tuple(start), tuple(ext), L, amb)
    if strict and amb:
        raise AmbiguousBox(f"two minimal boxes enclose the cluster (extents {box.extents})")
    return box


@dataclass(eq=False)
class Cluster:
    """An r-connected set of defects from one sector."""

    defects: DefectSet
    r: int
    sector: int
    _box: PeriodicBox | None = field(default=None, repr=False)

    def coords(self) -> np.ndarray:
        if self.sector < 0:
            return np.concatenate([self.defects.coords(0), self.defects.coords(1)])
        return self.defects.coords(self.sector)

    def __len__(self):
        return self.defects.count(None if self.sector < 0 else self.sector)

    @property
    def box(self) -> PeriodicBox:
        if self._box is None:
            self._box = box_from_coords(self.coords(), self.defects.lattice.L)
        return self._box


def minimal_enclosing_box(C, L: int | None = None, strict: bool = False) -> PeriodicBox:
    """Minimal box of dual-lattice vertices enclosing a cluster.

    Accepts a ``Cluster`` or an ``(m, D)`` array of cell coordinates.  When an
    axis has two longest gaps of equal length the smaller start wins and the
    box is flagged ``ambiguous``; with ``strict=True`` this raises instead.
    """
    if isinstance(C, Cluster):
        if L is None:
            L = C.defects.lattice.L
        if not strict and L == C.defects.lattice.L:
            return C.box
        return box_from_coords(C.coords(), L, strict)
    return box_from_coords(C, L, strict)


def connected_components(S: DefectSet, r: int, L: int | None = None, *, by_sector: bool = True) -> list:
    """Partition a defect set into maximal r-connected clusters.

    Sectors are clustered separately (the decoder treats them independently)
    unless ``by_sector=False``, in which case the sector of each cluster is
    reported as -1 and clusters may mix both sectors.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    lat = S.lattice
    if L is not None and L != lat.L:
        raise ValueError("L does not match the defect set lattice")
    Ls = axis_lengths(lat)
    out = []
    groups = [(s, [s]) for s in (0, 1)] if by_sector else [(-1, [0, 1])]
    for tag, sectors in groups:
        cells = np.concatenate([S.cells(s) for s in sectors])
        secs = np.concatenate([np.full(S.count(s), s) for s in sectors]).astype(np.int64)
        if len(cells) == 0:
            continue
        coords = as3d(lat.coords(cells), lat.D)
        labels, ncomp = label_components(coords, Ls, r)
        for c in range(ncomp):
            sel = labels == c
            D = DefectSet(lat)
            D.bits[secs[sel], cells[sel]] = 1
            out.append(Cluster(D, r, tag))
    return out
