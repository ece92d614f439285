"""Decode a few hand-made errors on the cubic code and narrate each step.

A single flipped qubit lights up a handful of defect cells.  The decoder
groups nearby defects, checks whether each group can be cleared inside its
bounding box, and applies the local correction.  We then ask whether the
leftover operator is a stabilizer (success) or a logical (silent failure).
"""
import numpy as np

from qmemsim.codes import build_code, classify, syndrome
from qmemsim.decoder import rg_decode
from qmemsim.pauli import PauliOperator

code = build_code("cubic3d", 7)
print(f"cubic code on a 7x7x7 torus: {code.n} qubits")

E = PauliOperator.single(code.n, 100, "Y")
S = syndrome(code, E)
out = rg_decode(code, S, log=True)
print(f"\none Y flip -> {len(S)} defects")
print("\n".join(out.trace_lines()))
print(f"verdict {out.verdict}; error times correction is a {classify(code, E * out.correction)}")

rng = np.random.default_rng(3)
print("\nthree random weight-4 errors:")
for _ in range(3):
    E = PauliOperator.identity(code.n)
    for q in rng.choice(code.n, 4, replace=False):
        E *= PauliOperator.single(code.n, int(q), str(rng.choice(list("XYZ"))))
    out = rg_decode(code, syndrome(code, E))
    verdict = classify(code, E * out.correction) if out.success else "aborted"
    letters = E.to_string()
    flips = " ".join(f"{letters[q]}{q}" for q in E.support())
    print(f"  {flips}: {verdict}")
