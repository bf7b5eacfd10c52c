"""A lower bound on minimum-error discrimination from positive definite witnesses.

Given W_i > 0 with <W_i, rho_i> <= 1, the success probability is at least
lambda_min((sum_i W_i^{-1})^{-1}) whatever the priors.  Witnesses built from
an Alice certificate of a subset protocol make the bound tight.
"""

import numpy as np

from dieroll.bounds import (
    QsdEnsemble,
    certificate_to_qsd_witness,
    purification_witnesses,
    qsd_lower_bound,
    qsd_optimum,
    random_ensemble,
    random_witnesses,
)
from dieroll.cheating import subset_alice_certificate
from dieroll.protocol import build_subset_protocol, reduced_states

rng = np.random.default_rng(7)
e = random_ensemble(rng, 3, 3)
print(f"random ensemble: optimum {qsd_optimum(e):.6f}")
print(f"  random witnesses bound     {qsd_lower_bound(random_witnesses(rng, e), e):.6f}")
print(f"  purification witnesses     {qsd_lower_bound(purification_witnesses(e), e):.6f}")

for D, m in [(4, 2), (5, 2), (6, 2)]:
    p = build_subset_protocol(D, m)
    e = QsdEnsemble(tuple(reduced_states(p)), tuple([1 / D] * D))
    W = certificate_to_qsd_witness(subset_alice_certificate(D, m), D)
    print(f"subset ({D},{m}): optimum {qsd_optimum(e):.9f}  bound {qsd_lower_bound(W, e):.9f}  1/m = {1/m:.9f}")
