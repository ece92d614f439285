"""Energy barrier of the recursive hook family.

The level-p hook is a scaled copy of a four-defect configuration.  Building it
one flip at a time, the defect count never exceeds 2p + 4, so the barrier
grows only logarithmically with the hook's size.
"""
from qmemsim.codes import build_code
from qmemsim.hooks import defect_counts, hook_path

for p in range(6):
    path = hook_path(p)
    counts = defect_counts(build_code("cubic3d", path.L), path)
    print(f"level {p}: lattice {path.L:>3}, {len(path):>5} flips, peak defects {max(counts):>2}, "
          f"ends with {counts[-1]}")

path = hook_path(2)
counts = defect_counts(build_code("cubic3d", path.L), path)
print("\ndefect count along the level-2 path:")
print(" ".join(map(str, counts)))
