"""Chunk levels of random errors as the error rate grows.

Sparse errors are almost all level-0 chunks (isolated sites).  Pairs of
nearby sites form level-1 chunks, pairs of those within a larger radius form
level 2, and so on; the maximum level m controls whether the decoder can
still succeed.
"""
import numpy as np

from qmemsim.chunks import chunk_decompose
from qmemsim.codes import LatticeSpec
from qmemsim.harness import sample_iid_error

lat = LatticeSpec(3, 17)
rng = np.random.default_rng(11)
for eps in (0.001, 0.003, 0.01):
    ms = []
    for _ in range(5):
        sites, _ = sample_iid_error(eps, lat, rng)
        dec = chunk_decompose(sites, 10, lat)
        ms.append(dec.m)
    print(f"eps={eps}: |E| about {eps * lat.nsites:.0f}, max levels over 5 samples {ms}")
