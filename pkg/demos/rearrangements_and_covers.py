"""
Rearrangements and minimal covers
=================================

A field on a weighted grid, its two monotone rearrangements, and the cheapest
way to collect a prescribed amount of mass.
"""

import numpy as np

from specdisc.measure import build_grid, refine
from specdisc.optcover import brute_force_I, check_prop34, greedy_I, solve_J
from specdisc.rearrange import rearrangement_table

# Five cells on [0, 1] with uneven density, and a field taking a few levels.
space = build_grid([(0.0, 1.0)], 5, density=[1.0, 2.0, 0.5, 1.5, 1.0]).with_values([3.0, 1.0, 4.0, 1.0, 0.0])
print("total mass", space.total_mass)

# The nonincreasing rearrangement reads levels from the top down, the
# nondecreasing one from the bottom up.
for row in rearrangement_table(None, space, [0.05, 0.2, 0.5]):
    print(row)

# Cheapest integral over sets of mass at least t.  The fractional optimum never
# exceeds the subset optimum, and refining the grid closes the gap.
t = 0.55
sol = solve_J(None, space, t)
print("J =", sol.value, "with tie level", sol.w_star, "fractional atom", sol.fractional)
print("subset optimum", brute_force_I(None, space, t), "greedy", greedy_I(None, space, t))
fine = refine(space, 64)
print("greedy after refinement", greedy_I(None, fine, t))

# Two-sided bound of the cover value by the top rearrangement.
print(check_prop34(None, space, 0.3, theta=2.0))
