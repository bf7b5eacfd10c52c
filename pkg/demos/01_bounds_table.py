"""Closed-form cheating bounds for D = 2..10, as truncated percentages.

Every entry except the 1/sqrt(D) row is an exact rational, so the
percentages are exact floors rather than rounded floats.
"""

from dieroll.bounds import bounds_table, theorem1_bound

rows = bounds_table(2, 10)
print("D       " + "".join(f"{r.D:>6}" for r in rows))
for key, name in [("as10", "3-msg"), ("classical", "classic"), ("quantum", "quantum"), ("kitaev", "1/sqrtD")]:
    print(f"{name:<8}" + "".join(f"{r.percentages[key]:>5}%" for r in rows))

# The quantum row is min of two branches; at D = 6 both give 4/9.
print("\nexact quantum bounds:", ", ".join(f"D={D}: {theorem1_bound(D)}" for D in range(2, 11)))
