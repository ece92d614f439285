import pytest

from qmemsim.codes import build_code, syndrome
from qmemsim.errors import DoesNotFit
from qmemsim.hooks import ErrorPath, defect_counts, hook_path, hook_syndrome, path_cost
from qmemsim.pauli import PauliOperator


def final_operator(code, path):
    P = PauliOperator.identity(code.n)
    for q, letter in path:
        P *= PauliOperator.single(code.n, q, letter)
    return P


def test_level0_hook():
    path = hook_path(0)
    code = build_code("cubic3d", path.L)
    P = final_operator(code, path)
    assert P.weight == 2
    assert len(syndrome(code, P)) == 4


def test_level1_cost_is_six():
    path = hook_path(1)
    assert path_cost(build_code("cubic3d", path.L), path) == 6


def test_level4_fits_l33():
    path = hook_path(4, 33)
    assert path_cost(build_code("cubic3d", 33), path) <= 12


@pytest.mark.parametrize("p", range(0, 5))
def test_final_configuration_is_scaled_hook(p):
    path = hook_path(p)
    code = build_code("cubic3d", path.L)
    S = syndrome(code, final_operator(code, path))
    cells = sorted(tuple(int(v) for v in code.lattice.coords(c)) for c in S.cells(0))
    want = sorted(hook_syndrome(p))
    # compare up to the translation applied by hook_path
    shift = [cells[0][a] - want[0][a] for a in range(3)]
    moved = sorted(tuple((w[a] + shift[a]) % code.L for a in range(3)) for w in want)
    assert cells == moved and S.count(1) == 0


def test_consecutive_steps_differ_on_one_qubit():
    for q, letter in hook_path(2):
        assert letter == "Z" and q >= 0


def test_does_not_fit():
    with pytest.raises(DoesNotFit):
        hook_path(4, 9)


def test_path_cost_basics(cubic5):
    assert path_cost(cubic5, ErrorPath([], 5)) == 0
    assert path_cost(cubic5, ErrorPath([(7, "X")], 5)) == 4
    there_and_back = ErrorPath([(7, "X"), (7, "X")], 5)
    assert path_cost(cubic5, there_and_back) == 4
    assert defect_counts(cubic5, there_and_back)[-1] == 0
    assert path_cost(cubic5, ErrorPath([(7, "Y")], 5)) == 8


def test_counts_match_dense_syndrome(cubic5):
    steps = [(3, "X"), (9, "Z"), (3, "Y"), (100, "X"), (9, "Z")]
    P = PauliOperator.identity(cubic5.n)
    want = []
    for q, letter in steps:
        P *= PauliOperator.single(cubic5.n, q, letter)
        want.append(len(syndrome(cubic5, P)))
    assert defect_counts(cubic5, ErrorPath(steps, 5)) == want
