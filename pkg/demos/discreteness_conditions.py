"""
Ball-type and level-type conditions
===================================

The same potential passes the condition built on dense systems and fails
the conditions built on balls or cubes.
"""

from specdisc.conditions import verify_example54, verify_example55

rep = verify_example54(1, n_range=range(1, 7), l_range=range(3, 8))
print("mean-level ratios", [str(r) for r in rep.ratios])
print("level-type trace", [float(v) for v in rep.thm313.values])

rep = verify_example55(1, j_range=range(1, 9))
print("first index with vanishing rearrangement", rep.J)
print("positive fractions", [str(p) for p in rep.positive_fraction])
print("gamma / r^alpha", [round(v, 2) for v in rep.divergence_ratio])
