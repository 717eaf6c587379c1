import math

import numpy as np
import pytest

from specdisc.geometry import Box
from specdisc.potentials import ValphaPotential
from specdisc.spectral import (assemble, bottom_trace, diagonal_centers, laplacian_1d, lowest_eigenvalues,
                               rayleigh, window)


def test_1d_ground_state():
    op = assemble(0.0, Box((0.0,), (math.pi,)), 400)
    lam = lowest_eigenvalues(op, 3).values
    h = math.pi / 401
    exact = [4 / h ** 2 * math.sin(k * h / 2) ** 2 for k in (1, 2, 3)]
    np.testing.assert_allclose(lam, exact, rtol=1e-10)
    assert lam[0] == pytest.approx(1.0, abs=1e-5)


def test_constant_shift_and_symmetry():
    box = Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    a = lowest_eigenvalues(assemble(0.0, box, 10), 2).values
    b = lowest_eigenvalues(assemble(2.5, box, 10), 2).values
    np.testing.assert_allclose(b - a, 2.5, atol=1e-9)
    H = assemble(lambda p: np.asarray(p)[:, 0] ** 2, box, 8).matrix
    assert abs(H - H.T).max() == 0
    assert a[0] == pytest.approx(3 * 4 * 11 ** 2 * math.sin(math.pi / 22) ** 2, rel=1e-10)


def test_rayleigh_quotient():
    op = assemble(lambda p: np.asarray(p).sum(axis=1) ** 2, Box((0.0, 0.0), (2.0, 1.0)), (30, 15))
    ev = lowest_eigenvalues(op, 1)
    assert rayleigh(op, ev.vectors[:, 0]) == pytest.approx(ev.values[0], rel=1e-8)
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert rayleigh(op, rng.standard_normal(op.size)) >= ev.values[0]


def test_domain_monotonicity():
    # Dirichlet eigenvalues decrease as the window grows
    V = lambda p: 1.0 + 0.0 * np.asarray(p)[:, 0]
    vals = [lowest_eigenvalues(assemble(V, window((0, 0, 0), s), 12), 1).values[0] for s in (1, 2, 4)]
    assert vals[0] > vals[1] > vals[2] > 1.0


def test_zero_potential_trace_is_flat():
    rows = bottom_trace(0.0, diagonal_centers([2, 5, 8]), 2.0, n=8)
    v = [r["eigenvalues"][0] for r in rows]
    assert max(v) - min(v) < 1e-9


def test_sampling_modes_and_guards():
    pot = ValphaPotential.build(1, "linf")
    box = window((3.5, 0.5, 0.5), 1.0)
    node = assemble(pot, box, 6, "node")
    avg = assemble(pot, box, 6, "x1-average", oversample=27)
    assert node.potential.shape == avg.potential.shape == (216,)
    assert np.all(avg.potential >= 0) and np.all(avg.potential <= pot.amplitude((3, 0, 0)))
    with pytest.raises(ValueError):
        assemble(pot, box, 6, "bogus")
    with pytest.raises(ValueError):
        assemble(-1.0, box, 4)
    with pytest.raises(ValueError):
        assemble(0.0, box, 200)
    assert laplacian_1d(3, 1.0).toarray().tolist() == [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
