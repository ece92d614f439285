"""Single-flip error paths, their energy cost, and the hook family.

A level-0 hook is the weight-2 operator ``Z`` on qubit 0 of a site times
``Z`` on qubit 1 of the site above it; it creates four X-type defects.  Its
syndrome is the polynomial ``s0 = fA + z fB`` in the footprints of the two
qubits, and the level-p hook is the scaled copy ``s0(x^P, y^P, z^P)`` with
``P = 2**p``.  Over GF(2) the scaled footprint of a single flip at site ``t``
is the sum of four scaled-down flips at ``2t + o`` (``o`` running over the
footprint), which gives a recursive path.  With the orders below the peak
defect count along the path is exactly ``2p + 4``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CUBIC, SECTOR_X, SECTOR_Z, CodeDescriptor, build_code
from .errors import DoesNotFit

_LETTER_SECTORS = {"X": (SECTOR_Z,), "Z": (SECTOR_X,), "Y": (SECTOR_X, SECTOR_Z)}


@dataclass
class ErrorPath:
    """Ordered single-qubit flips ``(qubit index, letter)`` on a code of size ``L``."""

    steps: list = field(default_factory=list)
    L: int | None = None
    kind: str = CUBIC

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def defect_counts(code: CodeDescriptor, path: ErrorPath) -> list:
    """Defect count after each step, tracked sparsely (no dense arrays)."""
    lat = code.lattice
    fp = code.footprints
    D = lat.D
    L = lat.L
    live = set()
    counts = []
    for qubit, letter in path:
        site, q = divmod(int(qubit), lat.q)
        coords = []
        s = site
        for _ in range(D):
            coords.append(s % L)
            s //= L
        for sector in _LETTER_SECTORS[letter.upper()]:
            for off in fp[sector, q]:
                idx = 0
                mult = 1
                for a in range(D):
                    idx += ((coords[a] + int(off[a])) % L) * mult
                    mult *= L
                key = (sector, idx)
                if key in live:
                    live.remove(key)
                else:
                    live.add(key)
        counts.append(len(live))
    return counts


def path_cost(code: CodeDescriptor, path: ErrorPath) -> int:
    """Peak number of defects over all prefixes of the path (0 when empty)."""
    counts = defect_counts(code, path)
    return max(counts) if counts else 0


# visiting order of the footprint offsets when expanding a scaled flip
_EXPAND_ORDER = ((0, 1, 2, 3), (1, 3, 0, 2))


def _x_footprints():
    from .codes import _cubic_footprints
    return _cubic_footprints()[SECTOR_X]


def hook_flips(p: int) -> list:
    """Unreduced ``(site, qubit)`` flips of the level-p hook path."""
    if p < 0:
        raise ValueError("level must be non-negative")
    fx = _x_footprints()

    def expand(q, t, level, out):
        if level == 0:
            out.append((t, q))
            return
        for k in _EXPAND_ORDER[q]:
            o = fx[q, k]
            expand(q, (2 * t[0] + o[0], 2 * t[1] + o[1], 2 * t[2] + o[2]), level - 1, out)

    out = []
    expand(0, (0, 0, 0), p, out)
    expand(1, (0, 0, 1), p, out)
    return out


def hook_syndrome(p: int) -> set:
    """Cells of the level-p hook (before any translation)."""
    P = 2 ** p
    return {(0, 0, P), (0, 0, 0), (0, 0, -P), (-P, -P, -P)}


def _span(flips):
    fx = _x_footprints()
    sites = np.array([s for s, _ in flips], dtype=np.int64)
    cells = (sites[:, None, :] + fx.min(axis=(0, 1))[None, None, :], sites[:, None, :] + fx.max(axis=(0, 1)))
    lo = np.minimum(cells[0].min(axis=(0, 1)), sites.min(axis=0))
    hi = np.maximum(cells[1].max(axis=(0, 1)), sites.max(axis=0))
    return lo, hi


def hook_extent(p: int) -> int:
    """Number of lattice planes per axis touched by the level-p hook path."""
    lo, hi = _span(hook_flips(p))
    return int((hi - lo + 1).max())


def hook_path(p: int, L: int | None = None) -> ErrorPath:
    """Recursive single-flip path from the vacuum to the level-p hook.

    The path uses Z flips only.  Coordinates are shifted so that every touched
    site and cell has non-negative coordinates.  When ``L`` is omitted the
    smallest odd size holding the path without wrap-around is used.

    Raises
    ------
    DoesNotFit
        If the path would wrap around a lattice of size ``L``.
    """
    flips = hook_flips(p)
    lo, hi = _span(flips)
    need = int((hi - lo + 1).max())
    if L is None:
        L = max(3, need + (need % 2 == 0))
    if need > L:
        raise DoesNotFit(f"level-{p} hook spans {need} planes, lattice has {L}")
    steps = []
    for (x, y, z), q in flips:
        site = (x - lo[0]) + L * ((y - lo[1]) + L * (z - lo[2]))
        steps.append((2 * int(site) + q, "Z"))
    return ErrorPath(steps, L, CUBIC)


def hook_cost(p: int, L: int | None = None) -> int:
    path = hook_path(p, L)
    return path_cost(build_code(CUBIC, path.L), path)
