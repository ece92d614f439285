"""Miniature versions of the two headline experiments.

First a toric-code bit-flip sweep: failure fractions for two sizes across
rates near the threshold.  Then thermal failure times of the cubic code at
a low temperature, where larger lattices survive longer.
"""
from qmemsim.harness import crossings, memory_time_campaign, threshold_sweep

recs = threshold_sweep("toric2d", [8, 16], [0.05, 0.07, 0.09], 300, seed=1, model="qubit")
for r in recs:
    print(f"toric L={r.L:<3} p={r.p:<5} failure fraction {r.fraction:.3f}")
print("crossings:", crossings(recs))

res = memory_time_campaign([4.2], [5, 7], 10, seed=1)
for s in res.summaries:
    print(f"cubic beta={s.beta} L={s.L}: tau = {s.tau:.3g} +- {s.ci:.2g} ({s.n} samples)")
