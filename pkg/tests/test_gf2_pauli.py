import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qmemsim import gf2
from qmemsim.pauli import PauliOperator


def matrices(max_rows=12, max_cols=70):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def dense_rank(M):
    """Plain row reduction over GF(2), no packing."""
    M = M.copy() % 2
    r = 0
    for c in range(M.shape[1]):
        piv = next((i for i in range(r, M.shape[0]) if M[i, c]), None)
        if piv is None:
            continue
        M[[r, piv]] = M[[piv, r]]
        for i in range(M.shape[0]):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        r += 1
    return r


@given(matrices())
def test_rank_matches_plain_elimination(M):
    assert gf2.rank(M) == dense_rank(M)


@given(matrices())
def test_nullspace_is_kernel_of_full_dimension(M):
    K = gf2.nullspace(M)
    assert K.shape[0] == M.shape[1] - gf2.rank(M)
    if len(K):
        assert not ((M.astype(int) @ K.T.astype(int)) % 2).any()
        assert gf2.rank(K) == K.shape[0]


@given(matrices(), st.data())
def test_solve_consistent_systems(A, data):
    x = data.draw(arrays(np.uint8, A.shape[1], elements=st.integers(0, 1)))
    b = (A.astype(int) @ x) % 2
    sol = gf2.solve(A, b)
    assert sol is not None
    assert np.array_equal((A.astype(int) @ sol) % 2, b)


def test_solve_inconsistent():
    A = np.array([[1, 1], [1, 1]], dtype=np.uint8)
    assert gf2.solve(A, np.array([1, 0])) is None


def test_pack_roundtrip():
    M = np.random.default_rng(0).integers(0, 2, (5, 131)).astype(np.uint8)
    assert np.array_equal(gf2.unpack(gf2.pack(M), 131), M)


def test_rowspace_membership():
    rows = np.array([[1, 0, 1, 0], [0, 1, 1, 0]], dtype=np.uint8)
    R = gf2.RowSpace(rows)
    assert R.rank == 2
    assert R.contains([1, 1, 0, 0])
    assert not R.contains([0, 0, 0, 1])
    assert R.extend([0, 0, 0, 1]) and R.rank == 3
    assert not R.extend([1, 1, 0, 1])


def test_pauli_algebra():
    X = PauliOperator.single(3, 0, "X")
    Z = PauliOperator.single(3, 0, "Z")
    Y = PauliOperator.single(3, 0, "Y")
    assert X * Z == Y
    assert not X.commutes(Z)
    assert X.commutes(PauliOperator.single(3, 1, "Z"))
    assert (X * X).is_identity()
    assert PauliOperator.from_string("XIZ").to_string() == "XIZ"
    assert PauliOperator.from_string("XYZ").weight == 3
    assert PauliOperator.from_qubits(4, [1, 1, 2], "Z").to_string() == "IIZI"


@given(st.text(alphabet="IXYZ", min_size=1, max_size=30), st.text(alphabet="IXYZ", min_size=1, max_size=30))
def test_symplectic_product_is_parity_of_anticommuting_sites(a, b):
    n = min(len(a), len(b))
    P, Q = PauliOperator.from_string(a[:n]), PauliOperator.from_string(b[:n])
    anti = sum(1 for u, v in zip(a[:n], b[:n]) if "I" not in (u, v) and u != v)
    assert P.symplectic(Q) == anti % 2
    assert hash(P * Q) == hash(Q * P)


def test_pauli_size_mismatch():
    with pytest.raises(ValueError):
        PauliOperator.identity(2) * PauliOperator.identity(3)
