"""The subset commitment states and an honest run.

Alice commits to a by sending half of a uniform superposition over the
m-subsets containing a.  Bob only ever sees the reduced states rho_a,
which are diagonal in the subset basis.
"""

import numpy as np

from dieroll.protocol import ClassicalSubsetProtocol, build_subset_protocol, reduced_states, simulate_honest, subsets

D, m = 4, 2
p = build_subset_protocol(D, m)
print(f"{p.label}: dimA = dimB = {p.dims.dimB}, basis {subsets(D, m)}")
print("overlaps <psi_a|psi_b>:\n", np.round(p.gram().real, 4))
print("rho_1 diagonal:", np.round(np.diag(reduced_states(p)[0]).real, 4))

run = simulate_honest(p, seed=0, trials=20_000, keep=3)
print("\nhonest outcomes (20000 runs):", run.histogram, "all accepted:", run.all_accepted)
for t in run.transcripts:
    print("  transcript", t)

crun = simulate_honest(ClassicalSubsetProtocol(D, m), seed=0, trials=20_000)
print("classical subset protocol outcomes:", crun.histogram)
