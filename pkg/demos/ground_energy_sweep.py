"""
Ground energies of windows moving outwards
==========================================

Dirichlet ground energies of ``-Delta + V`` on cubes of side 4 centered at
``(k, k, k)``.  A growing potential pushes them up; ``V = 0`` keeps them flat.
A coarse grid keeps this script quick.
"""

from fractions import Fraction

from specdisc.potentials import ValphaPotential
from specdisc.spectral import bottom_trace, diagonal_centers

centers = diagonal_centers(range(2, 9))
pot = ValphaPotential.build(Fraction(1, 10), "linf")
for V, name in ((pot, "V_alpha"), (0.0, "zero")):
    rows = bottom_trace(V, centers, 4.0, n=12, sample="x1-average", oversample=27)
    print(name, [round(r["eigenvalues"][0], 3) for r in rows])
