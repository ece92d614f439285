import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmemsim.chunks import (chunk_decompose, distance_matrix, exhaustive_level_sets,
                            site_coords)
from qmemsim.codes import LatticeSpec
from qmemsim.errors import QTooSmall
from qmemsim.harness import sample_iid_error


def masks_of(dec):
    pos = {int(s): i for i, s in enumerate(dec.sites)}
    return [sum(1 << pos[int(s)] for s in E) for E in dec.E]


def clustered_sites(rng, lat, k):
    D, L = lat.D, lat.L
    centre = rng.integers(0, L, D)
    spread = int(rng.choice([2, 4, 10, 30]))
    pts = (centre + rng.integers(-spread, spread + 1, (k, D))) % L
    return np.unique(pts @ (L ** np.arange(D)))


def test_single_site():
    lat = LatticeSpec(3, 20)
    dec = chunk_decompose([123], 10, lat)
    assert dec.m == 0 and list(dec.levels[0]) == [123]


def test_close_pair():
    lat = LatticeSpec(3, 20)
    a, b = int(lat.index((1, 1, 1))), int(lat.index((6, 3, 1)))
    dec = chunk_decompose([a, b], 10, lat)
    assert dec.m >= 1 and set(dec.E[1]) == {a, b}
    far = int(lat.index((7, 1, 1)))
    assert chunk_decompose([a, far], 10, lat).m == 0


def test_q_too_small():
    with pytest.raises(QTooSmall):
        chunk_decompose([0], 5, LatticeSpec(2, 10))


def test_empty():
    dec = chunk_decompose([], 10, LatticeSpec(2, 10))
    assert dec.m == 0 and len(dec.sites) == 0


def test_matches_exhaustive_oracle(rng):
    mismatches = 0
    for _ in range(1000):
        Q = int(rng.choice([6, 7, 10]))
        lat = LatticeSpec(int(rng.choice([2, 3])), int(rng.choice([20, 40, 64, 128])))
        sites = clustered_sites(rng, lat, int(rng.integers(1, 13)))
        dec = chunk_decompose(sites, Q, lat)
        assert dec.exact
        dist = distance_matrix(site_coords(lat, dec.sites), lat.L)
        mismatches += masks_of(dec) != exhaustive_level_sets(dist, Q)
    assert mismatches == 0


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([6, 10]))
def test_levels_partition_and_chain(seed, Q):
    rng = np.random.default_rng(seed)
    lat = LatticeSpec(3, 40)
    sites = clustered_sites(rng, lat, int(rng.integers(1, 16)))
    dec = chunk_decompose(sites, Q, lat)
    allF = np.concatenate(dec.levels)
    assert sorted(allF.tolist()) == sorted(dec.sites.tolist())
    for a, b in zip(dec.E, dec.E[1:]):
        assert set(b) <= set(a)
    assert not dec.check_structure()


def test_random_iid_errors_structure(rng):
    lat = LatticeSpec(3, 13)
    for _ in range(20):
        sites, _ = sample_iid_error(0.004, lat, rng)
        dec = chunk_decompose(sites, 10, lat)
        assert sorted(np.concatenate(dec.levels).tolist()) == sorted(sites.tolist())
        if dec.exact:
            assert not dec.check_structure()


def test_dense_errors_fall_back_to_certified_subset():
    rng = np.random.default_rng(0)
    lat = LatticeSpec(3, 13)
    sites = np.flatnonzero(rng.random(lat.nsites) < 0.01)
    dec = chunk_decompose(sites, 10, lat, max_chunks=2000)
    assert not dec.exact
    ref = chunk_decompose(sites, 10, lat, max_chunks=100_000, check=False)
    # greedy certification can only lose sites from a level
    for n, E in enumerate(dec.E):
        if n < len(ref.E):
            assert set(E) <= set(ref.E[n])


def test_f_site_can_neighbour_higher_level():
    # a, b, c within 1; d, e far away.  {a,b} u {d,e} has diameter 18 = 36/2,
    # {a,c} or {b,c} with {d,e} has 19, so c stays in F_1 right next to E_2.
    lat = LatticeSpec(2, 128)
    pts = [(74, 44), (74, 45), (75, 45), (56, 59), (59, 59)]
    sites = [x + 128 * y for x, y in pts]
    dec = chunk_decompose(sites, 6, lat)
    c = 75 + 128 * 45
    assert dec.levels[1].tolist() == [c]
    assert c not in dec.E[2] and len(dec.E[2]) == 4
    assert dec.check_structure() == []
