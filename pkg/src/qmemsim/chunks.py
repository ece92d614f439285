"""Hierarchical chunk decomposition of an error's site set.

A level-0 chunk is a single site.  A level-n chunk is the disjoint union of
two level-(n-1) chunks whose union has diameter at most ``Q**n / 2``.  ``E_n``
is the union of all level-n chunks, ``F_n = E_n minus E_{n+1}``, and the
maximum level ``m`` is the last non-empty ``E_n``.

Chunks are held as integer bitmasks over the error sites and built bottom-up.
A level-n chunk has diameter at most ``Q**n / 2`` and is therefore
``Q**n / 2``-connected, so level-n candidates are paired only inside the
connected components of ``E_{n-1}`` at that scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .codes import LatticeSpec
from .errors import QTooSmall
from .geometry import label_components

DEFAULT_Q = 10


def site_coords(lattice: LatticeSpec, sites) -> np.ndarray:
    """(m, 3) integer coordinates of site indices (z = 0 in two dimensions)."""
    sites = np.asarray(sites, dtype=np.int64)
    L = lattice.L
    out = np.zeros((len(sites), 3), dtype=np.int64)
    s = sites.copy()
    for a in range(lattice.D):
        out[:, a] = s % L
        s //= L
    return out


def distance_matrix(coords: np.ndarray, L: int) -> np.ndarray:
    """Pairwise periodic l-infinity distances."""
    d = np.abs(coords[:, None, :] - coords[None, :, :])
    d = np.minimum(d, L - d)
    return d.max(axis=2)


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass
class ChunkDecomposition:
    """Levels ``F_0 .. F_m`` (site index arrays) of an error set."""

    levels: list
    E: list  # E_0 .. E_m as site index arrays
    m: int
    Q: int
    lattice: LatticeSpec | None = None
    chunk_counts: list = field(default_factory=list)
    exact: bool = True  # False when a level fell back to greedy certification

    @property
    def sites(self) -> np.ndarray:
        return self.E[0] if self.E else np.zeros(0, dtype=np.int64)

    def level_of(self) -> dict:
        """Map site index -> level n with the site in ``F_n``."""
        return {int(s): n for n, F in enumerate(self.levels) for s in F}

    def check_structure(self) -> list:
        """Violations of the level-separation property (empty when it holds).

        Every ``Q**n``-connected component of ``F_n`` must have diameter at
        most ``Q**n``, and every pair ``u`` in ``F_n``, ``v`` in ``E_n`` must be
        either within ``Q**n`` or farther than ``Q**(n+1) / 3``.  A component
        need not be far from all of ``E_n``: a site of ``E_{n+1}`` may sit
        within ``Q**n`` of it (see ``tests/test_chunks.py``).
        """
        bad = []
        if self.lattice is None or not len(self.sites):
            return bad
        L = self.lattice.L
        Ls = np.array([L, L, L if self.lattice.D == 3 else 1], dtype=np.int64)
        for n, F in enumerate(self.levels):
            if not len(F):
                continue
            scale = self.Q ** n
            cF = site_coords(self.lattice, F)
            labels, ncomp = label_components(cF, Ls, min(scale, 2 * L))
            for c in range(ncomp):
                cM = cF[labels == c]
                if len(cM) > 1 and distance_matrix(cM, L).max() > scale:
                    bad.append((n, "diameter", F[labels == c].tolist()))
            cE = site_coords(self.lattice, self.E[n])
            d = np.abs(cF[:, None, :] - cE[None, :, :])
            d = np.minimum(d, L - d).max(axis=2)
            gap = (d > scale) & (3 * d <= self.Q ** (n + 1))
            for i in np.flatnonzero(gap.any(axis=1)):
                bad.append((n, "separation", [int(F[i])]))
        return bad


def _components(members, dist, limit):
    """Groups of ``members`` connected by distance <= limit (union-find)."""
    parent = {u: u for u in members}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in combinations(members, 2):
        if dist[a, b] <= limit:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups = {}
    for u in members:
        groups.setdefault(find(u), []).append(u)
    return list(groups.values())


def _pair_exact(chunks, group_mask, dist, limit, max_chunks, nxt):
    """Every disjoint pair inside one group; False when over budget."""
    local = [(c, d, list(_bits(c))) for c, d in chunks.items() if c & group_mask]
    if len(local) * (len(local) - 1) // 2 > max_chunks * 10:
        return False
    for (ca, da, ma), (cb, db, mb) in combinations(local, 2):
        if ca & cb:
            continue
        u = ca | cb
        if u in nxt or max(da, db) > limit:
            continue
        diam = max(da, db, dist[np.ix_(ma, mb)].max())
        if diam <= limit:
            nxt[u] = diam
            if len(nxt) > max_chunks:
                return False
    return True


def _pair_greedy(chunks, group_mask, dist, limit, keep, nxt):
    """Certify, for each uncovered site, one pair of disjoint chunks holding it.

    At most ``keep`` certified chunks are retained per site, so the result is
    a subset of the true level set.
    """
    local = sorted((d, c) for c, d in chunks.items() if c & group_mask)
    count = {}
    pool = []
    for d, c in local:
        mem = list(_bits(c))
        if any(count.get(w, 0) < keep for w in mem):
            pool.append((c, d, mem))
            for w in mem:
                count[w] = count.get(w, 0) + 1
    local = pool
    held = {}
    for c in nxt:
        for u in _bits(c):
            held[u] = held.get(u, 0) + 1
    for u in _bits(group_mask):
        if held.get(u, 0) >= keep:
            continue
        mine = [t for t in local if (t[0] >> u) & 1]
        found = 0
        for ca, da, ma in mine:
            if da > limit:
                continue
            for cb, db, mb in local:
                if ca & cb or db > limit or (ca | cb) in nxt:
                    continue
                diam = max(da, db, dist[np.ix_(ma, mb)].max())
                if diam <= limit:
                    nxt[ca | cb] = diam
                    for w in _bits(ca | cb):
                        held[w] = held.get(w, 0) + 1
                    found += 1
                    break
            if found + held.get(u, 0) >= keep:
                break


def _level_sets(dist: np.ndarray, Q: int, max_chunks: int, keep: int = 4):
    """Bottom-up ``E_n`` masks, chunk counts and an exactness flag."""
    m = len(dist)
    chunks = {1 << i: 0 for i in range(m)}  # mask -> diameter
    E = [(1 << m) - 1 if m else 0]
    counts = [m]
    exact = True
    n = 0
    while len(chunks) >= 2:
        n += 1
        limit = Q ** n / 2
        members = list(_bits(E[-1]))
        nxt = {}
        for group in _components(members, dist, limit):
            if len(group) < 2 ** n:
                continue
            gmask = 0
            for u in group:
                gmask |= 1 << u
            if exact:
                trial = {}
                if _pair_exact(chunks, gmask, dist, limit, max_chunks, trial):
                    nxt.update(trial)
                    continue
                exact = False
            _pair_greedy(chunks, gmask, dist, limit, keep, nxt)
        if not nxt:
            break
        mask = 0
        for c in nxt:
            mask |= c
        E.append(mask)
        counts.append(len(nxt))
        chunks = nxt
    return E, counts, exact


def chunk_decompose(E, Q: int = DEFAULT_Q, lattice: LatticeSpec | None = None, *,
                    max_chunks: int = 20_000, check: bool = True) -> ChunkDecomposition:
    """Split the error sites ``E`` into chunk levels.

    Parameters
    ----------
    E : array_like of int
        Occupied site indices (duplicates are ignored).
    Q : int
        Box growth parameter, at least 6.
    lattice : LatticeSpec
        Geometry used for periodic distances.
    check : bool
        Verify the separation property on exact outputs.

    Raises
    ------
    QTooSmall
        If ``Q < 6``.

    Notes
    -----
    Levels are enumerated exactly while the chunk family stays within
    ``max_chunks``.  Past that the remaining levels are certified greedily,
    which can only under-report ``E_n``; ``exact`` records which happened.
    """
    if Q < 6:
        raise QTooSmall(f"Q={Q} is below 6")
    if lattice is None:
        raise ValueError("a lattice is required")
    sites = np.unique(np.asarray(E, dtype=np.int64))
    if len(sites) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return ChunkDecomposition([empty], [empty], 0, Q, lattice, [0], True)
    dist = distance_matrix(site_coords(lattice, sites), lattice.L)
    masks, counts, exact = _level_sets(dist, Q, max_chunks)
    En = [sites[list(_bits(mk))] for mk in masks]
    levels = [sites[list(_bits(masks[n] & ~(masks[n + 1] if n + 1 < len(masks) else 0)))]
              for n in range(len(masks))]
    dec = ChunkDecomposition(levels, En, len(masks) - 1, Q, lattice, counts, exact)
    if check and exact:
        bad = dec.check_structure()
        if bad:
            raise AssertionError(f"separation property violated: {bad[0]}")
    return dec


def exhaustive_level_sets(dist: np.ndarray, Q: int) -> list:
    """``E_n`` masks by direct top-down enumeration of the chunk definition.

    A subset of size ``2**n`` is tested by trying every split into two halves
    that are themselves chunks.  Exponential; meant for ``|E| <= 12``.
    """
    m = len(dist)
    memo = {}

    def diam(members):
        return dist[np.ix_(members, members)].max() if len(members) > 1 else 0

    def is_chunk(members: tuple, n: int) -> bool:
        if n == 0:
            return True
        key = members
        if key in memo:
            return memo[key]
        ok = False
        if diam(list(members)) <= Q ** n / 2:
            first = members[0]
            rest = members[1:]
            half = len(members) // 2
            for others in combinations(rest, half - 1):
                a = (first,) + others
                b = tuple(x for x in rest if x not in others)
                if is_chunk(a, n - 1) and is_chunk(b, n - 1):
                    ok = True
                    break
        memo[key] = ok
        return ok

    out = [(1 << m) - 1 if m else 0]
    n = 1
    while 2 ** n <= m:
        mask = 0
        for sub in combinations(range(m), 2 ** n):
            if is_chunk(sub, n):
                for u in sub:
                    mask |= 1 << u
        if not mask:
            break
        out.append(mask)
        n += 1
    return out
