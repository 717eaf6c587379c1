import math

import numpy as np
import pytest
from scipy.integrate import quad

from specdisc.geometry import Ball, Box, cap_ball, unit_ball_volume
from specdisc.polyhedron import (DistortedMeasure, f_distortion, hl_dominance_check, kappa_const,
                                 lemma42_check, max_delta_for_inscribed_cube, mu_s_mass,
                                 pushforward_check, q_ratio, random_boxes, random_intervals, s_map,
                                 sigma_delta, slice_fraction, slice_offset, subcube_box, z_weight)

BALL = Ball((0.0, 0.0, 0.0), 1.0)


def slice_oracle(d, c):
    w = lambda u: (1 - u * u) ** ((d - 1) / 2)
    return quad(w, -1, c, epsabs=1e-13)[0] / quad(w, -1, 1, epsabs=1e-13)[0]


@pytest.mark.parametrize("d", [3, 4, 5])
def test_slice_fraction_vs_quadrature(d):
    for c in np.linspace(-1, 1, 17):
        assert slice_fraction(d, c) == pytest.approx(slice_oracle(d, c), abs=1e-10)


def test_slice_fraction_examples():
    assert slice_fraction(3, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert slice_fraction(3, 1.0) == 1.0
    assert slice_fraction(3, 0.5) == pytest.approx(27 / 32, abs=1e-15)
    with pytest.raises(ValueError):
        slice_fraction(3, 1.5)
    assert slice_fraction(3, slice_offset(3, 0.3)) == pytest.approx(0.3, abs=1e-12)


def test_s_map_and_weight():
    b = Ball((2.0, 1.0, 0.0), 0.5)
    assert s_map(3, b, np.array([2.0, 1.0, 0.0])) == pytest.approx(0.5)
    assert s_map(3, b, np.array([1.5, 1.0, 0.0])) == 0.0
    # scale/translation identity
    x = np.array([2.2, 1.1, 0.1])
    assert s_map(3, b, x) == pytest.approx(s_map(3, BALL, (x - b.center) / b.radius))
    assert z_weight(3, BALL, np.zeros(3)) == pytest.approx(3 * 0.5 ** (2 / 3))
    assert z_weight(3, BALL, np.array([-1.0, 0, 0])) == 0.0


def test_sigma_delta():
    # target 1/2 sits at the center
    d = 3
    delta = d / (d - 2) * 0.5 ** (2 / d)
    assert sigma_delta(d, delta) == pytest.approx(1.0, abs=1e-10)
    ds = np.linspace(0.2, 1.5, 10)
    sig = [sigma_delta(3, x) for x in ds]
    assert np.all(np.diff(sig) > 0)
    for x, s in zip(ds, sig):
        assert slice_fraction(3, s - 1) == pytest.approx((x / 3) ** 1.5, abs=1e-9)
    with pytest.raises(ValueError):
        sigma_delta(3, 5.0)
    dmax = max_delta_for_inscribed_cube(3)
    assert sigma_delta(3, dmax) == pytest.approx(1 - 1 / math.sqrt(3), abs=1e-9)


def test_distorted_masses():
    dm = DistortedMeasure(3, BALL, 48)
    cap = cap_ball(3, 1.0)
    assert mu_s_mass(dm, None) == pytest.approx(cap, rel=1e-12)
    half = dm.sublevel_mask(24)
    assert dm.mask_mass(half, "m") == pytest.approx(0.5, abs=1e-12)
    assert mu_s_mass(dm, half) == pytest.approx(cap * 2 ** (-1 / 3), rel=1e-12)
    assert mu_s_mass(dm, np.zeros(dm.shape, bool)) == 0.0
    # box query through the summed-area table agrees with the mask sum
    box = Box((-0.3, -0.5, 0.1), (0.6, 0.2, 0.9))
    c = dm.centers()
    mask = np.zeros(dm.shape, bool)
    idx = np.argwhere(dm.inside)
    inb = np.all((c >= box.lo) & (c <= box.hi), axis=1)
    mask[tuple(idx[inb].T)] = True
    assert mu_s_mass(dm, box) == pytest.approx(dm.mask_mass(mask), rel=1e-12)


def test_density_floor():
    dm = DistortedMeasure(3, BALL, 40)
    dens = dm.slab_density[dm.slab_mass > 0]
    assert dens.min() >= 1 / 3 - 1e-12
    assert dens.min() == pytest.approx(1 / 3, abs=1e-3)
    # weight times density is 1
    assert np.allclose(dm.slab_weight[dm.slab_mass > 0] * dens, 1.0)


def test_dominance_small():
    dm = DistortedMeasure(3, BALL, 32)
    rep = hl_dominance_check(dm, random_boxes(BALL, 200, seed=3))
    assert rep.worst >= -1e-12
    full = hl_dominance_check(dm, [dm.inside])
    assert abs(full.margin[0]) < 1e-12


def test_dimension_guards():
    with pytest.raises(ValueError):
        DistortedMeasure(6, Ball((0.0,) * 6, 1.0), 4)
    with pytest.raises(ValueError):
        DistortedMeasure(2, Ball((0.0,) * 2, 1.0), 4)


def test_pushforward_trivial():
    rep = pushforward_check(3, BALL, [50, 25, 25], [(0.0, 1.0), (0.0, 0.5)])
    assert rep.discrepancy[0] < 1e-12
    assert rep.discrepancy[1] < 1e-12
    assert rep.max_discrepancy <= rep.sup_discrepancy


def test_q_scale_invariance_and_kappa():
    q1 = DistortedMeasure(3, BALL, 60)
    q2 = DistortedMeasure(3, Ball((3.0, -1.0, 2.0), 0.5), 60)
    b1, b2 = subcube_box(3, q1.ball), subcube_box(3, q2.ball)
    r1 = mu_s_mass(q1, b1) / q1.total_mu
    r2 = mu_s_mass(q2, b2) / q2.total_mu
    assert r1 == pytest.approx(r2, abs=1e-6)
    # cell-center inclusion at the cube faces oscillates at this resolution
    assert r1 == pytest.approx(q_ratio(3), rel=0.15)
    k = kappa_const(3, 0.6)
    assert 0 < k.kappa < 0.6 * k.q < 1
    with pytest.raises(ValueError):
        kappa_const(3, 0.8)


def test_q_quadrature_matches_direct_integral():
    d = 3
    s = 1 / math.sqrt(d)
    # f'(F(c)) integrated on the sub-cube's first-coordinate range
    val = quad(lambda c: (1 / 3) * slice_oracle(d, c) ** (-2 / 3), 0, s)[0]
    assert q_ratio(3) == pytest.approx(s ** 2 / unit_ball_volume(3) * val, rel=1e-8)


def test_lemma42_examples():
    dm = DistortedMeasure(3, BALL, 30)
    delta = 0.9 * max_delta_for_inscribed_cube(3)
    n = int(dm.inside.sum())
    zero = lemma42_check(dm, np.zeros(n), 0.5, delta)
    assert zero.lhs == 0 and zero.rhs == 0 and zero.ok
    box = subcube_box(3, BALL)
    ind = lambda c: np.all((c >= box.lo) & (c <= box.hi), axis=1).astype(float)
    chk = lemma42_check(dm, ind, 0.5, delta)
    assert chk.ok and chk.rhs == pytest.approx(delta)
    with pytest.raises(ValueError):
        lemma42_check(dm, np.zeros(n), 0.5, 1.2)
