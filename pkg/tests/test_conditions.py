import math
from fractions import Fraction as F

import numpy as np
import pytest

from specdisc.conditions import (cantor_cylinder, cond_gmd, cond_mu_s, cond_thm35, cond_thm36,
                                 cond_thm313, divergence_verdict, gmd_ratio_exact, log_gamma_hat,
                                 power_gamma, verify_example54, verify_example55, wbar_from_distribution,
                                 xi_nonempty_check)
from specdisc.densesys import cantor_system, cylinder_extend
from specdisc.geometry import Ball, Box, cube
from specdisc.polyhedron import DistortedMeasure
from specdisc.potentials import ValphaPotential

CENTERS = [(float(k), 0.0, 0.0) for k in (1, 2, 4, 8)]


def test_verdict():
    assert divergence_verdict([1, 2, 3]) == "growing"
    assert divergence_verdict([1, 1.5, 1.9]) == "bounded"
    assert divergence_verdict([3, 2, 9]) == "bounded"
    assert divergence_verdict([0, 0, 1]) == "growing"
    assert divergence_verdict([5]) == "undecided"


def test_constant_field_traces():
    r = 0.5
    vol = (2 * r / math.sqrt(3)) ** 3
    tr = cond_thm35(2.0, CENTERS, r, lambda s: 0.25, resolution=6)
    assert np.allclose(tr.values, 2.0 * 0.75 * vol, rtol=1e-12)
    assert tr.verdict == "bounded"
    tr = cond_thm36(2.0, CENTERS, r, lambda s: 0.25, resolution=6)
    assert np.allclose(tr.values, 2.0) and tr.params["sandwich_failures"] == []
    tr = cond_mu_s(2.0, CENTERS[:2], r, lambda s: 0.3, resolution=10)
    # oracle: sort the density-weighted field by value and walk the mu-mass
    dm = DistortedMeasure(3, Ball(CENTERS[0], r), 10)
    z, mu = 2.0 * dm.weights(), dm.mu[dm.inside]
    order = np.argsort(-z, kind="stable")
    k = np.searchsorted(np.cumsum(mu[order]), 0.3 * mu.sum() * (1 - 1e-12))
    assert tr.values[0] == pytest.approx(z[order][k], rel=1e-12)
    assert tr.values[0] == tr.values[1]


def test_growing_potential():
    V = lambda p: (np.asarray(p) ** 2).sum(axis=1)
    tr = cond_thm36(V, CENTERS, 0.5, lambda s: 0.25, resolution=6)
    assert tr.verdict == "growing" and tr.params["sandwich_failures"] == []
    tr = cond_thm35(V, CENTERS, 0.5, lambda s: 0.25, resolution=6)
    assert tr.verdict == "growing"
    with pytest.raises(ValueError):
        cond_thm35(V, CENTERS, 0.5, lambda s: 1.5)


def test_gmd():
    res = cond_gmd(3.0, 1.0, 0.5, 0.5, [(0, 0, 0)], resolution=4)
    assert res[0].ratio_cube == pytest.approx(1.0)
    assert res[0].ratio_ball == pytest.approx(0.125 / (4 / 3 * math.pi * 0.125))
    step = lambda p: (np.asarray(p)[:, 0] < 0.25).astype(float)
    res = cond_gmd(step, 1.0, 0.1, 1.0, [(0, 0, 0)], resolution=8)
    assert res[0].ratio_cube == pytest.approx(0.25)
    pot = ValphaPotential.build(1, "linf")
    assert gmd_ratio_exact(pot, cube((F(3) + F(1, 27), F(0), F(0)), F(1, 27))) == F(1, 27)


def test_wbar_from_distribution():
    dist = {3.0: F(1, 4), 0.0: F(3, 4)}
    assert wbar_from_distribution(dist, F(1, 4)) == 3
    assert wbar_from_distribution(dist, F(1, 3)) == 0


def test_thm313_constant_and_cantor():
    tr = cond_thm313(5.0, power_gamma(1), 2, [(3, 0, 0), (4, 1, 0)], resolution=2)
    assert [float(v) for v in tr.values] == [5.0, 5.0]
    pot = ValphaPotential.build(1, "linf")
    tr = cond_thm313(pot, power_gamma(1), 2, [(k, 0, 0) for k in (3, 4, 5)])
    assert [float(v) for v in tr.values] == [3.0, 4.0, 5.0]
    assert tr.verdict == "bounded"   # grows, but less than twofold over this window


def test_xi_nonempty_and_control():
    table = xi_nonempty_check(cantor_cylinder, [1, 2, 3], [(3, 0, 0), (5, 2, 1)])
    assert len(table) == 2 * (1 + 2 + 3) and all(table.values())
    gap = lambda l: cantor_cylinder(l).without_levels({2})
    table = xi_nonempty_check(gap, [2], [(3, 0)])
    assert table[((3, 0), 2, 1)] and not table[((3, 0), 2, 2)]
    with pytest.raises(ValueError):
        cond_thm313(1.0, power_gamma(1), 2, [(2, 0)], system_for=gap)


def test_example54():
    rep = verify_example54(1, n_range=range(1, 5), l_range=range(3, 6))
    assert rep.exact and rep.max_error == 0.0 and rep.thm313_exact and rep.decreasing
    assert rep.ratios == [F(1, 3 ** n) for n in range(1, 5)]
    rep = verify_example54(F(3, 2), n_range=range(1, 4), l_range=range(3, 5))
    assert rep.max_error <= 1e-12


def test_example55():
    rep = verify_example55(1, j_range=range(1, 9))
    assert rep.J == 1 and rep.ratio_increasing
    assert rep.positive_fraction == [F(1, 3 ** j) for j in range(1, 9)]
    assert all(v == 0 for v in rep.rearrangement)
    g = log_gamma_hat(3)
    assert g(F(1, 8)) == pytest.approx(0.25 * math.log(8))
    with pytest.raises(ValueError):
        verify_example55(F(1, 2))
