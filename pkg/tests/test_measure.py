import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specdisc.measure import WeightedSpace, build_grid, refine, restrict


def test_uniform_grid_masses():
    sp = build_grid([(0, 1)], 4)
    assert len(sp) == 4
    np.testing.assert_allclose(sp.masses, 0.25)


def test_grid_total_mass_2d():
    assert build_grid([(0, 1), (0, 1)], (2, 2)).total_mass == pytest.approx(1.0, abs=1e-15)


def test_midpoint_density():
    sp = build_grid([(0, 3)], 3, density=lambda c: c[:, 0])
    np.testing.assert_allclose(sp.masses, [0.5, 1.5, 2.5])


def test_density_array_and_zero_cells_dropped():
    sp = build_grid([(0, 1)], 4, density=[1, 0, 2, 0])
    assert list(sp.ids) == [0, 2]
    with pytest.raises(ValueError):
        build_grid([(0, 1)], 2, density=[0, 0])


def test_refine_counts_and_conservation():
    one = build_grid([(0, 1)], 1)
    two = refine(one, 2)
    assert len(two) == 2 and np.allclose(two.masses, 0.5)
    four = build_grid([(0, 1)], 4)
    assert len(refine(four, 3)) == 12
    with pytest.raises(ValueError):
        refine(four, 1)


def test_refine_keeps_parent_edges():
    sp = build_grid([(0.1, 0.7), (0, 1)], (3, 2))
    ref = refine(sp, 3)
    assert ref.hi.max(axis=0).tolist() == sp.hi.max(axis=0).tolist()


def test_restrict_examples():
    sp = build_grid([(0, 1)], 4)
    assert restrict(sp, [(0, 1)]).total_mass == sp.total_mass
    half = restrict(sp, lambda c: c[:, 0] < 0.5)
    assert len(half) == 2
    sq = build_grid([(0, 1), (0, 1)], (4, 4))
    assert restrict(sq, [(0, 0.5), (0, 1)]).total_mass == pytest.approx(0.5)
    with pytest.raises(ValueError):
        restrict(sp, [(2, 3)])


def test_record_roundtrip():
    sp = WeightedSpace([0.5, 1.5], ids=[3, 7], values=[1.0, 2.0])
    back = WeightedSpace.from_record(sp.to_record())
    assert back.ids.tolist() == [3, 7] and back.values.tolist() == [1.0, 2.0]
    assert back.total_mass == sp.total_mass


def test_validation():
    with pytest.raises(ValueError):
        WeightedSpace([])
    with pytest.raises(ValueError):
        WeightedSpace([1.0, -1.0])
    with pytest.raises(ValueError):
        WeightedSpace([1.0, 1.0], ids=[0, 0])
    sp = WeightedSpace([1.0])
    with pytest.raises(ValueError):
        sp.masses[0] = 2.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(2, 4), st.floats(0.05, 0.95))
def test_mass_additivity_and_refinement(nx, ny, k, cut):
    sp = build_grid([(0, 1), (0, 2)], (nx, ny), density=lambda c: 1 + c[:, 0] * c[:, 1])
    left = sp.centers[:, 0] <= cut
    parts = [sp.subset(m) for m in (left, ~left) if m.any()]
    assert sum(p.total_mass for p in parts) == pytest.approx(sp.total_mass, rel=1e-12)
    assert refine(sp, k).total_mass == pytest.approx(sp.total_mass, rel=1e-12)
