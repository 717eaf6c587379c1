"""
Capacity of balls and m-adic cells
==================================

Closed-form ball capacities, the isocapacity identity, and the exact
rational cell hierarchy used to index dense systems.
"""

import math
from fractions import Fraction

from specdisc.geometry import (Box, StarDomain, ball_volume, c_d, cap_ball, gamma_admissible,
                               gamma_from_tilde, madic_cells, xi_subset)

for d in (3, 4, 5):
    r = 2.0
    print(d, "cap", cap_ball(d, r), "volume", ball_volume(d, r),
          "c_d cap^(d/(d-2))", c_d(d) * cap_ball(d, r) ** (d / (d - 2)))

# Level-2 ternary cells of the unit square: 81 of them, exact corners.
cells = madic_cells((0, 0), 2)
print(len(cells), "cells, first", cells[0].box)

# Cells of level 1 inside the middle-third strip.
strip = Box((Fraction(1, 3), Fraction(0)), (Fraction(2, 3), Fraction(1)))
print("cells in the strip", len(xi_subset((0, 0), 1, [strip])))

# Profiles gamma(r) against the exponent 2/3 in d = 3: a logarithmic excess
# over r^(2/3) is enough to diverge, while gamma(r) = r decays too fast.
print(gamma_admissible(lambda r: r ** (2 / 3) * math.log(1 / r), 2 / 3, d=3).verdict)
print(gamma_admissible(lambda r: r, 2 / 3, d=3).verdict)
star = StarDomain.ball(3)
print("ball profile at r = 1/8:", gamma_from_tilde(lambda r: r, star)(0.125))
