"""Opt-in long campaign: memory time against lattice size and temperature.

Sweeps beta in {4.2, ..., 5.25} and L in {5, 9, 17, 33}, fits the power-law
exponent of tau against L below the optimal size for each beta, and fits
log tau_max against beta**2.  Expect days of CPU time at full sample counts;
pass a smaller sample count and more workers to try it:

    python demos/full_memory_campaign.py 20 4
"""
import sys

from qmemsim.harness import memory_time_campaign
from qmemsim.records import write_csv

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 100
workers = int(sys.argv[2]) if len(sys.argv) > 2 else 1
betas = [4.2, 4.5, 4.75, 5.0, 5.25]
res = memory_time_campaign(betas, [5, 9, 17, 33], samples, seed=2026, workers=workers)
write_csv(res.records, "memory_campaign.csv")
for s in res.summaries:
    print(f"beta={s.beta:<5} L={s.L:<3} tau={s.tau:.4g} +- {s.ci:.2g}  n={s.n} censored={s.censored}")
for beta, fit in res.exponents.items():
    print(f"beta={beta}: exponent {fit.slope:.2f} over {fit.points} sizes")
if res.beta_fit is not None:
    print(f"log tau_max = {res.beta_fit.slope:.2f} beta^2 + {res.beta_fit.intercept:.2f}")
