from fractions import Fraction as F

import pytest

from specdisc.densesys import (cantor_adjacent, cantor_system, check_r, cylinder_extend, index_patterns,
                               j_bound, product_combine, validate_witness, verify_system, witness)
from specdisc.geometry import Box


def test_cantor_levels():
    assert cantor_adjacent(1) == [Box((F(1, 3),), (F(2, 3),))]
    assert cantor_adjacent(2) == [Box((F(1, 9),), (F(2, 9),)), Box((F(7, 9),), (F(8, 9),))]
    for n in range(1, 9):
        lv = cantor_adjacent(n)
        assert len(lv) == 2 ** (n - 1)
        assert sum(b.volume for b in lv) == F(2 ** (n - 1), 3 ** n)
        assert all(a.hi[0] < b.lo[0] for a, b in zip(lv, lv[1:]))
    with pytest.raises(ValueError):
        cantor_adjacent(21)


def test_cylinder_and_product_structure():
    cyl = cylinder_extend(cantor_system(), (0,))
    assert cyl.dim == 2 and len(cyl.level(3)) == 4
    assert cyl.level(1)[0].volume == F(1, 3)
    assert cyl.check_structure(4)
    c = cantor_system()
    assert product_combine([c]) is c
    p = product_combine([c, cantor_system()])
    assert p.level(1) == [Box((F(1, 3), F(1, 3)), (F(2, 3), F(2, 3)))]
    # |E_N| = N^I - (N-1)^I
    for I in (1, 2, 3):
        for N in (1, 2, 3, 4):
            assert len(index_patterns(I, N)) == N ** I - (N - 1) ** I
    assert len(p.level(2)) == 1 * 2 + 2 * 1 + 2 * 2


def test_witness_examples():
    s = cantor_system()
    w = witness(s, (F(1, 5),), F(1, 2))
    assert w.j == 1 and w.box == Box((F(1, 3),), (F(2, 3),))
    assert validate_witness(s, (F(1, 5),), F(1, 2), w)
    inside = witness(s, (F(2, 5),), F(1, 5))
    assert inside.j == 1
    # cube straddling the gap around a level-2 interval edge
    z, r = (F(2, 9) - F(1, 100),), F(1, 10)
    w = witness(s, z, r)
    assert w is not None and validate_witness(s, z, r, w)
    with pytest.raises(ValueError):
        check_r(s, F(1))
    with pytest.raises(ValueError):
        witness(s, (F(19, 20),), F(1, 10))


def test_j_bound_exact():
    assert j_bound(3, F(1, 9), F(1, 3)) == 3   # 3^3 * 1/27 = 1
    assert j_bound(3, F(1, 9), F(1, 3) + F(1, 10 ** 9)) == 2


def test_verify_small():
    rep = verify_system(cantor_system(), 1500, seed=1)
    assert rep.failed == 0 and rep.worst_slack >= 0
    broken = verify_system(cantor_system().without_levels({2}), 1500, seed=1)
    assert broken.failed > 0
    cyl = verify_system(cylinder_extend(cantor_system(), (1,)), 300, seed=2)
    assert cyl.failed == 0


def test_theta_monotone():
    s = cantor_system()
    for th in (F(1, 9), F(1, 12)):
        assert verify_system(s.with_theta(th), 400, seed=5).failed == 0
