import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmemsim.codes import DefectSet, LatticeSpec
from qmemsim.errors import AmbiguousBox
from qmemsim.geometry import (PeriodicBox, connected_components, distance, enclosing_interval,
                              label_components, label_components_pairwise, minimal_enclosing_box)


def canon(labels):
    seen = {}
    return [seen.setdefault(int(x), len(seen)) for x in labels]


def random_defects(rng, D, L, m):
    lat = LatticeSpec(D, L)
    S = DefectSet(lat)
    S.bits[rng.integers(0, 2, m), rng.integers(0, lat.ncells, m)] = 1
    return S


def interval_oracle(xs, L):
    """Try every start; shortest covering interval, smallest start on ties."""
    best = None
    for s in range(L):
        ext = max((x - s) % L for x in xs) + 1
        if best is None or ext < best[1]:
            best = (s, ext)
    return best


def test_distance_examples():
    assert distance((0, 0, 0), (0, 0, 1), 8) == 1
    assert distance((0, 0, 0), (0, 0, 7), 8) == 1
    assert distance((1, 2, 3), (4, 6, 5), 8) == 4


def test_empty_and_threshold_distance():
    lat = LatticeSpec(3, 12)
    assert connected_components(DefectSet(lat), 2) == []
    for r in (1, 2, 3):
        near = DefectSet.from_cells(lat, [((0, 0, 0), 0), ((r, 0, 0), 0)])
        far = DefectSet.from_cells(lat, [((0, 0, 0), 0), ((r + 1, 0, 0), 0)])
        assert len(connected_components(near, r)) == 1
        assert len(connected_components(far, r)) == 2


def test_against_pairwise_oracle(rng):
    mismatches = 0
    for trial in range(1000):
        D = int(rng.choice([2, 3]))
        L = int(rng.integers(3, 24))
        r = int((1, 2, 4, 8)[trial % 4])
        Ls = np.array([L, L, L if D == 3 else 1])
        m = int(rng.integers(0, 50))
        c = np.stack([rng.integers(0, Ls[a], m) for a in range(3)], axis=1).astype(np.int64)
        a, _ = label_components(c, Ls, r)
        b = label_components_pairwise(c, Ls, r)
        mismatches += canon(a) != canon(b)
    assert mismatches == 0


def test_partition_and_separation(rng):
    for _ in range(300):
        D = int(rng.choice([2, 3]))
        L = int(rng.integers(4, 16))
        S = random_defects(rng, D, L, int(rng.integers(1, 30)))
        r = int(rng.choice([1, 2, 3]))
        comps = connected_components(S, r)
        union = DefectSet(S.lattice)
        total = 0
        for C in comps:
            union ^= C.defects
            total += len(C)
        assert union == S and total == len(S)
        for i, A in enumerate(comps):
            ca = A.coords()
            for B in comps[i + 1:]:
                if A.sector != B.sector:
                    continue
                cb = B.coords()
                assert min(distance(u, v, L) for u in ca for v in cb) > r
            # intra-cluster r-connectivity by flood fill
            reach = {0}
            frontier = [0]
            while frontier:
                u = frontier.pop()
                for v in range(len(ca)):
                    if v not in reach and distance(ca[u], ca[v], L) <= r:
                        reach.add(v)
                        frontier.append(v)
            assert len(reach) == len(ca)


def test_refinement_monotone(rng):
    for _ in range(100):
        S = random_defects(rng, 3, 10, 25)
        fine = connected_components(S, 1)
        coarse = connected_components(S, 3)
        for C in fine:
            hosts = [K for K in coarse if K.sector == C.sector and ((C.defects.bits & K.defects.bits) == C.defects.bits).all()]
            assert len(hosts) == 1


def test_single_defect_box():
    lat = LatticeSpec(3, 8)
    C = connected_components(DefectSet.from_cells(lat, [((3, 4, 5), 1)]), 1)[0]
    B = minimal_enclosing_box(C)
    assert B.start == (3, 4, 5) and B.extents == (1, 1, 1) and B.diameter == 0


def test_wrapped_interval():
    s, e, tied = enclosing_interval(np.array([0, 7]), 8)
    assert (s, e) == (7, 2) and not tied


def test_tied_interval():
    # cells 0, 2, 5 on a ring of 8: two gaps of length 2, either way 6 cells
    s, e, tied = enclosing_interval(np.array([0, 2, 5]), 8)
    assert (s, e) == interval_oracle([0, 2, 5], 8) == (0, 6)
    assert tied
    with pytest.raises(AmbiguousBox):
        minimal_enclosing_box(np.array([[0], [2], [5]]), 8, strict=True)


@given(st.integers(3, 30).flatmap(lambda L: st.tuples(st.just(L), st.lists(st.integers(0, L - 1), min_size=1, max_size=12))))
def test_interval_against_oracle(args):
    L, xs = args
    s, e, _ = enclosing_interval(np.array(xs, dtype=np.int64), L)
    assert (s, e) == interval_oracle(xs, L)


@given(st.integers(4, 20), st.data())
def test_box_is_minimal(L, data):
    m = data.draw(st.integers(1, 8))
    pts = np.array(data.draw(st.lists(st.tuples(*[st.integers(0, L - 1)] * 3), min_size=m, max_size=m)))
    B = minimal_enclosing_box(pts, L)
    assert B.contains(pts)
    for a in range(3):
        if B.extents[a] == 1:
            continue
        for shift in (0, 1):
            start = list(B.start)
            ext = list(B.extents)
            start[a] += shift
            ext[a] -= 1
            assert not PeriodicBox(tuple(start), tuple(ext), L).contains(pts)


def test_labelling_scales_subquadratically():
    rng = np.random.default_rng(3)

    def cost(L):
        Ls = np.array([L, L, 1])
        m = int(0.1 * L * L)
        c = np.stack([rng.integers(0, L, m), rng.integers(0, L, m), np.zeros(m, int)], 1).astype(np.int64)
        label_components(c, Ls, 2)
        best = np.inf
        for _ in range(5):
            t = time.perf_counter()
            label_components(c, Ls, 2)
            best = min(best, time.perf_counter() - t)
        return best

    assert cost(256) <= 10 * cost(128)
