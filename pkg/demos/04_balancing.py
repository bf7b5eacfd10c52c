"""Balancing a lopsided protocol and carrying certificates across.

For D = 3 the subset protocol with m = 2 lets Alice cheat with 2/3 and Bob
with 1/2.  Mixing each state with a private orthogonal direction of weight
t moves the two numbers towards each other; at the optimal t both equal 3/5.
"""

from dieroll.balancing import theorem1_pipeline
from dieroll.cheating import analyze, verify_alice_certificate, verify_bob_certificate

for D in (3, 5, 6, 7, 10):
    res = theorem1_pipeline(D)
    q = res.transformed
    bc, ac = res.transported_certs
    vb, va = verify_bob_certificate(q, bc), verify_alice_certificate(q, ac)
    print(f"D={D:>2} m={res.source.meta['m']} {res.direction:<12} t={float(res.t):.4f} dim={q.dims.dimB:>3} "
          f"bound={res.bound} certified bob={vb.value:.9f} alice={va.value:.9f} ok={vb.ok and va.ok}")

# For small D the transformed protocol is cheap enough to solve outright.
res = theorem1_pipeline(3)
rep = analyze(res.transformed, mode="solve")
print(f"\nD=3 transformed, solved: Bob {rep.solver_bob:.9f}, Alice {rep.solver_alice:.9f}, bound {float(res.bound)}")
