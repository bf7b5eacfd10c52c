"""Optimal cheating by SDP, sandwiched between explicit strategies and dual certificates."""

from dieroll.cheating import analyze, kitaev_bob_strategy, bob_strategy_value, subset_alice_certificate
from dieroll.protocol import build_subset_protocol

for D, m in [(3, 1), (4, 2), (5, 2), (6, 3)]:
    p = build_subset_protocol(D, m)
    rep = analyze(p, mode="both")
    print(f"D={D} m={m}")
    print(f"  Bob:   strategy {rep.p_bob_lower:.9f}  solver {rep.solver_bob:.9f}  certificate {rep.p_bob_upper:.9f}  (1/m = {1/m:.9f})")
    print(f"  Alice: strategy {rep.p_alice_lower:.9f}  solver {rep.solver_alice:.9f}  certificate {rep.p_alice_upper:.9f}  (m/D = {m/D:.9f})")
    print(f"  P_A * P_B = {rep.kitaev_product:.9f}  vs 1/D = {1/D:.9f}")

# Any feasible dual point for Alice is also a measurement for Bob.
D, m = 5, 2
cert = subset_alice_certificate(D, m)
strat = kitaev_bob_strategy(cert)
val = bob_strategy_value(build_subset_protocol(D, m), strat)
print(f"\nBob measuring with Z_a/s on (5,2): {val:.6f};  s * value = {cert.s * val:.6f} >= 1/D = {1/D}")
