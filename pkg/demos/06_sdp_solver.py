"""Using the block SDP solver directly.

Largest eigenvalue as an SDP: maximise <C, X> over density matrices.  The
dual variable y is the eigenvalue and S = yI - C is the dual slack.
"""

import numpy as np

from dieroll import sdp

rng = np.random.default_rng(1)
G = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
C = (G + G.conj().T) / 2

bld = sdp.SdpBuilder(real=False)
bld.add_block(6, C)
bld.add_dense_constraints([(0, [np.eye(6)])], [1.0])
prob = bld.build()

sol = sdp.solve(prob)
print(f"status {sol.status} after {sol.iterations} iterations")
print(f"primal {sol.primal_value:.10f}  dual {sol.dual_value:.10f}  eigh {np.linalg.eigvalsh(C)[-1]:.10f}")

rep = sdp.verify_feasible_pair(prob, sol.X, sol.y)
print(f"independent check: gap {rep.gap:.2e}, primal ok {rep.primal_ok}, dual ok {rep.dual_ok}")
