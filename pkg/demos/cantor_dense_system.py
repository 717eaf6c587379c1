"""
A dense system from the middle thirds
=====================================

Level ``n`` holds the ``2^(n-1)`` open middle intervals removed at step ``n``.
Every small cube contains a scaled sub-cube inside some interval of low level.
"""

from fractions import Fraction

from specdisc.densesys import (cantor_adjacent, cantor_system, product_combine, verify_system,
                               witness)

for n in range(1, 4):
    print(n, [(str(b.lo[0]), str(b.hi[0])) for b in cantor_adjacent(n)])

system = cantor_system()
w = witness(system, (Fraction(1, 5),), Fraction(1, 2))
print("witness level", w.j, "cube", w.box)

print(verify_system(system, 2000, seed=0))
print("without level 2:", verify_system(system.without_levels({2}), 2000, seed=0).failed, "failures")
print(verify_system(product_combine([cantor_system(), cantor_system()]), 300, seed=0))
