"""
The distorted measure on a ball
===============================

A measure on the unit ball whose mass on every box stays below the capacity
bound, with equality on half-spaces ``{x_1 <= c}``.
"""

import numpy as np

from specdisc.geometry import Ball
from specdisc.polyhedron import (DistortedMeasure, hl_dominance_check, kappa_const,
                                 max_delta_for_inscribed_cube, pushforward_check, random_boxes,
                                 random_intervals, slice_fraction)

ball = Ball((0.0, 0.0, 0.0), 1.0)
print("slice fractions", [round(slice_fraction(3, c), 4) for c in (-0.5, 0.0, 0.5)])

dm = DistortedMeasure(3, ball, 32)
print("total mass", dm.total_mu, "capacity", dm.cap)

rep = hl_dominance_check(dm, random_boxes(ball, 200, seed=0))
print("smallest margin over 200 boxes", rep.worst)
halves = hl_dominance_check(dm, [dm.sublevel_mask(k) for k in (8, 16, 24)])
print("margins on half-spaces", halves.margin)

# The slice map pushes normalized ball measure to Lebesgue measure on [0, 1].
for res in ([100, 50, 50], [200, 100, 100]):
    pf = pushforward_check(3, ball, res, random_intervals(50, seed=1))
    print(res, "sup discrepancy", pf.sup_discrepancy)

delta = 0.9 * max_delta_for_inscribed_cube(3)
print(kappa_const(3, delta))
