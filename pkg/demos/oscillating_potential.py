"""
An oscillating potential on Cantor intervals
============================================

``V`` takes the value ``N(l)`` on a thin periodic subset of each level ``n``
interval in the unit cube ``Q_1(l)`` and vanishes elsewhere.
"""

from fractions import Fraction

import numpy as np

from specdisc.potentials import ValphaPotential, positivity_fraction_on_cell

pot = ValphaPotential.build(1, "linf")
for x in [(Fraction(10, 27), 0, 0), (Fraction(1, 2), 0, 0), (Fraction(3) + Fraction(1, 3) + Fraction(1, 324), 0, 0)]:
    print([str(v) for v in x], "->", pot(x))

# On a level-2 cell inside a level-2 interval the positive part fills 1/9.
print(positivity_fraction_on_cell(pot, (3, 0, 0), 2, 2))

# Vectorized evaluation agrees with the exact one.
rng = np.random.default_rng(0)
pts = rng.uniform(-4, 4, (1000, 3))
exact = np.array([pot(tuple(p)) for p in pts], dtype=float)
print("disagreements", np.count_nonzero(exact != pot.evaluate(pts)))
