import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specdisc.measure import WeightedSpace
from specdisc.rearrange import (check_inclusion_monotonicity, check_union_inequality, lambda_lower,
                                lambda_upper, rearr_nondecreasing, rearr_nonincreasing,
                                rearrangement_table, strict_sublevel, wbar_star_any)

ONES3 = WeightedSpace([1, 1, 1])
V124 = [1, 2, 4]


def wbar_oracle(vals, masses, t):
    # direct definition: sup of levels s > 0 with mass{W >= s} >= t
    cands = [s for s in set(vals) if s > 0 and sum(m for v, m in zip(vals, masses) if v >= s) >= t]
    return max(cands) if cands else 0.0


def wstar_oracle(vals, masses, t):
    # smallest level whose sublevel mass reaches t
    return min(s for s in set(vals) if sum(m for v, m in zip(vals, masses) if v <= s) >= t)


def test_distribution_functions():
    assert lambda_lower(V124, ONES3, 2) == 2
    assert lambda_lower(V124, ONES3, 0.5) == 0
    assert lambda_lower(V124, ONES3, 4) == 3
    assert lambda_upper(V124, ONES3, 2) == 2
    assert lambda_upper(V124, ONES3, 0) == 3
    assert lambda_upper(V124, ONES3, 5) == 0


def test_nondecreasing_examples():
    assert rearr_nondecreasing(V124, ONES3, 1.5) == 2
    assert rearr_nondecreasing(V124, ONES3, 0.5) == 1  # regression: not the empty-sup value 0
    assert rearr_nondecreasing([3, 3], WeightedSpace([1, 1]), 1.2) == 3


def test_nonincreasing_examples():
    assert rearr_nonincreasing([5, 3, 3, 1], WeightedSpace([1] * 4), 2) == 3
    assert rearr_nonincreasing(V124, ONES3, 3) == 1
    assert rearr_nonincreasing([2.5] * 3, ONES3, 2.9) == 2.5
    assert rearr_nonincreasing([0, 0], WeightedSpace([1, 1]), 1) == 0
    assert wbar_star_any(V124, ONES3, 3.5) == 0


def test_t_domain():
    for t in (0, -1, 3.0001):
        with pytest.raises(ValueError):
            rearr_nonincreasing(V124, ONES3, t)


def test_strict_sublevel():
    ids, k = strict_sublevel(V124, ONES3, 1.5)
    assert ids.tolist() == [0] and k == 1
    ids, k = strict_sublevel([2, 2], WeightedSpace([1, 1]), 1)
    assert ids.size == 0 and k == 0
    _, k = strict_sublevel(V124, ONES3, 3)
    assert k == 2


def test_table_rows():
    rows = rearrangement_table(V124, ONES3, [1.5, 3])
    assert rows[0] == {"t": 1.5, "W_star": 2.0, "Wbar_star": 2.0, "kappa_minus": 1.0}


def test_union_examples():
    sp = WeightedSpace([1, 1, 1, 1])
    vals = [1, 1, 9, 9]
    one = check_union_inequality(vals, sp, [[0, 1, 2, 3]], 0.5)
    assert one.lhs == one.rhs
    two = check_union_inequality(vals, sp, [[0, 1], [2, 3]], 0.5)
    assert two.ok and two.lhs == 9 and two.rhs == 1
    with pytest.raises(ValueError):
        check_union_inequality(vals, sp, [[0, 1], [1, 2]], 0.5)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(1, 4)), min_size=1, max_size=9),
       st.floats(0.01, 1.0))
def test_rearrangements_match_definition(atoms, q):
    vals = [float(v) for v, _ in atoms]
    masses = [float(m) for _, m in atoms]
    sp = WeightedSpace(masses)
    t = q * sp.total_mass
    assert rearr_nonincreasing(vals, sp, t) == wbar_oracle(vals, masses, t)
    assert rearr_nondecreasing(vals, sp, t) == wstar_oracle(vals, masses, t)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_in_t(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    sp = WeightedSpace(rng.uniform(0.1, 2, n))
    vals = rng.integers(0, 5, n).astype(float)
    ts = np.sort(rng.uniform(1e-6, 1, 20)) * sp.total_mass
    up = [rearr_nondecreasing(vals, sp, t) for t in ts]
    down = [rearr_nonincreasing(vals, sp, t) for t in ts]
    assert all(b >= a for a, b in zip(up, up[1:]))
    assert all(b <= a for a, b in zip(down, down[1:]))


def test_inclusion_examples():
    sp = WeightedSpace([1, 2, 3])
    vals = [4.0, 1.0, 2.0]
    same = check_inclusion_monotonicity(vals, sp, [0, 1, 2], 1.0)
    assert same.lhs == same.rhs
    single = check_inclusion_monotonicity(vals, sp, [1], 0.5)
    assert single.ok and single.lhs == 1.0
