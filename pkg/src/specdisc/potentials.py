"""Oscillating potentials carried by Cantor adjacent intervals.

In each unit cube ``Q_1(l)`` the potential depends only on the local first
coordinate ``x = x_1 - l_1`` in ``(0, 1]``: it vanishes off the Cantor
adjacent intervals and equals ``N(l) theta_beta(3^p x)`` on the level-``n``
intervals, with ``beta = 3^(-alpha n)``, ``p = |l|_inf + 1`` and
``theta_beta`` the 1-periodic indicator of ``(0, beta]``.

Points on cube faces belong to the cube with the smallest index
(``l = ceil(x) - 1`` per axis, so local coordinates lie in ``(0, 1]``).

Exact arithmetic is used whenever ``alpha n`` is an integer (``beta`` is
then a rational power of three); otherwise ``beta`` is the float value,
converted once to a Fraction so that every routine sees the same number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .geometry import Box

MAX_TERNARY_DEPTH = 64


def as_fraction(v) -> Fraction:
    """Exact rational for ints, Fractions and decimal strings; floats go through ``repr``."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(repr(float(v)))


def _frac_part_closed(y: Fraction) -> Fraction:
    # representative of y modulo 1 in (0, 1]
    return y - math.ceil(y) + 1


# ---------------------------------------------------------- theta and beta


def eval_theta(beta, x) -> int:
    """1-periodic indicator of ``(0, beta]``; exact for rational arguments."""
    if not (0 < beta < 1):
        raise ValueError("beta must lie in (0, 1)")
    if isinstance(x, (Fraction, int)) and isinstance(beta, (Fraction, int)):
        return int(_frac_part_closed(Fraction(x)) <= beta)
    x = float(x)
    u = x - math.ceil(x) + 1.0
    return int(u <= float(beta))


def beta_level(alpha, n: int) -> Fraction:
    """``3^(-alpha n)`` as a Fraction: exact when ``alpha n`` is an integer."""
    e = as_fraction(alpha) * n
    if e.denominator == 1:
        return Fraction(1, 3 ** int(e))
    return Fraction(3.0 ** (-float(e)))


def beta_is_exact(alpha, n: int) -> bool:
    return (as_fraction(alpha) * n).denominator == 1


def positivity_measure_exact(S, beta, a, b):
    """``M(S, beta, a, b) = mes{x in [a, b] : theta_beta(S x) > 0}``.

    Period counting with ``F(u) = floor(u) beta + min(u - floor(u), beta)``,
    the measure of ``{theta_beta > 0}`` in ``[0, u]``; ``M = (F(Sb) - F(Sa))/S``.
    Rational inputs give a rational result.
    """
    if S <= 0:
        raise ValueError("S must be positive")
    if b < a:
        raise ValueError("need a <= b")
    exact = all(isinstance(v, (Fraction, int)) for v in (S, beta, a, b))
    if not exact:
        S, beta, a, b = float(S), float(beta), float(a), float(b)

    def F(u):
        k = math.floor(u)
        return k * beta + min(u - k, beta)

    return (F(S * b) - F(S * a)) / S


def lemma56_bounds(S, beta, a, b) -> tuple:
    """``beta(b-a) -+ 2 beta/S``, the two-sided bound on :func:`positivity_measure_exact`."""
    return beta * (b - a) - 2 * beta / S, beta * (b - a) + 2 * beta / S


# ---------------------------------------------------------- Cantor levels


def cantor_level(x) -> int:
    """Level ``n`` of the adjacent interval (closed) containing ``x`` in ``(0, 1]``; 0 if none.

    Iterated ternary zoom, exact for Fractions, capped at
    :data:`MAX_TERNARY_DEPTH` levels (deeper points count as off the intervals).
    """
    if not (0 < x <= 1):
        raise ValueError("x must lie in (0, 1]")
    third, two_thirds = (Fraction(1, 3), Fraction(2, 3)) if isinstance(x, (Fraction, int)) else (1 / 3, 2 / 3)
    y = x
    for n in range(1, MAX_TERNARY_DEPTH + 1):
        if third <= y <= two_thirds:
            return n
        y = 3 * y if y < third else 3 * y - 2
    return 0


def cantor_levels_array(x: np.ndarray) -> np.ndarray:
    """Vectorised float version of :func:`cantor_level`."""
    y = np.array(x, dtype=float)
    level = np.zeros(y.shape, dtype=np.int64)
    open_ = np.ones(y.shape, dtype=bool)
    for n in range(1, MAX_TERNARY_DEPTH + 1):
        hit = open_ & (y >= 1 / 3) & (y <= 2 / 3)
        level[hit] = n
        open_ &= ~hit
        if not open_.any():
            break
        y = np.where(y < 1 / 3, 3 * y, 3 * y - 2)
    return level


def eval_sigma(N, p: int, alpha, x) -> float:
    """``N theta_beta(3^p x)`` with ``beta = 3^(-alpha n)`` on level-``n`` intervals, 0 elsewhere."""
    if N <= 0:
        raise ValueError("N must be positive")
    if int(p) != p or p < 0:
        raise ValueError("p must be a natural number")
    _check_alpha(alpha)
    n = cantor_level(x)
    if n == 0:
        return 0.0
    y = 3 ** int(p) * x
    if isinstance(x, (Fraction, int)):
        return N * _theta_exact(alpha, n, Fraction(y))
    return N * eval_theta(float(beta_level(alpha, n)), y)


def _theta_exact(alpha, n: int, y: Fraction) -> int:
    u = _frac_part_closed(y)
    e = as_fraction(alpha) * n
    if e.denominator == 1:
        return int(u <= Fraction(1, 3 ** int(e)))
    # u <= 3^(-a/b)  <=>  u^b 3^a <= 1  (exact, any rational exponent)
    return int(u ** e.denominator * 3 ** e.numerator <= 1)


def _check_alpha(alpha):
    if not (0 < as_fraction(alpha) < 2):
        raise ValueError("alpha must lie in (0, 2)")


# ---------------------------------------------------------------- N rules


def n_rule(name: str, table: Optional[Mapping[int, float]] = None) -> Callable[[Sequence[int]], float]:
    """Amplitude rules ``N(l) >= 1`` keyed by ``|l|_inf``.

    ``log``: ``1 + ln(1 + |l|)``, ``sqrt``: ``1 + sqrt(|l|)``, ``linf``:
    ``max(1, |l|)``, ``custom``: a table ``|l| -> N`` whose last entry
    extends linearly in ``|l|``.
    """
    if name == "log":
        return lambda l: 1.0 + math.log1p(_linf(l))
    if name == "sqrt":
        return lambda l: 1.0 + math.sqrt(_linf(l))
    if name == "linf":
        return lambda l: float(max(1, _linf(l)))
    if name == "custom":
        if not table:
            raise ValueError("custom rule needs a table")
        keys = sorted(int(k) for k in table)
        vals = {int(k): float(v) for k, v in table.items()}
        if any(v < 1 for v in vals.values()):
            raise ValueError("table values must be >= 1")
        last = keys[-1]

        def rule(l):
            k = _linf(l)
            if k in vals:
                return vals[k]
            if k > last:
                return vals[last] * k / max(last, 1)
            below = [q for q in keys if q <= k]
            return vals[below[-1]] if below else vals[keys[0]]
        return rule
    raise ValueError(f"unknown N rule {name!r}")


def _linf(l) -> int:
    return int(max(abs(int(v)) for v in l))


# -------------------------------------------------------------- potential


def cube_index(x) -> tuple[int, ...]:
    """``l`` with ``x`` in ``Q_1(l)``, faces going to the smaller index."""
    return tuple(int(math.ceil(v)) - 1 for v in x)


@dataclass(frozen=True)
class ValphaPotential:
    alpha: Fraction
    N: Callable[[Sequence[int]], float]
    d: int = 3
    rule_name: str = "custom"

    @classmethod
    def build(cls, alpha, rule: str = "linf", d: int = 3, table=None) -> "ValphaPotential":
        _check_alpha(alpha)
        if d < 1:
            raise ValueError("dimension must be positive")
        return cls(as_fraction(alpha), n_rule(rule, table), d, rule)

    def amplitude(self, l) -> float:
        v = float(self.N(l))
        if v < 1:
            raise ValueError("N(l) must be >= 1")
        return v

    def period_exponent(self, l) -> int:
        return _linf(l) + 1

    def beta(self, n: int) -> Fraction:
        return beta_level(self.alpha, n)

    def __call__(self, x) -> float:
        """Pointwise value; exact path for Fraction coordinates."""
        if len(x) != self.d:
            raise ValueError("point dimension mismatch")
        l = cube_index(x)
        local = x[0] - l[0]
        return eval_sigma(self.amplitude(l), self.period_exponent(l), self.alpha, local)

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised float evaluation on ``(n, d)`` points."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        L = np.ceil(pts).astype(np.int64) - 1
        local = pts[:, 0] - L[:, 0]
        linf = np.abs(L).max(axis=1)
        rows, inv = np.unique(L, axis=0, return_inverse=True)
        amp = np.array([self.amplitude(tuple(r)) for r in rows])[inv.ravel()]
        level = cantor_levels_array(local)
        out = np.zeros(pts.shape[0])
        on = level > 0
        if not on.any():
            return out
        e = float(self.alpha) * level[on]
        beta = 3.0 ** (-e)
        y = local[on] * 3.0 ** (linf[on] + 1)
        u = y - np.ceil(y) + 1.0
        out[on] = np.where(u <= beta, amp[on], 0.0)
        return out

    # -- exact distributions --------------------------------------------

    def positive_measure_1d(self, l, a, b):
        """``mes{x in [a, b] : V > 0}`` along the first local coordinate, ``[a, b]`` inside one adjacent interval.

        Returns ``(measure, level)``.  Raises when ``[a, b]`` is not contained
        in a single adjacent interval (use :meth:`positive_measure_1d_any`).
        """
        a, b = as_fraction(a), as_fraction(b)
        n = adjacent_level_containing(a, b)
        if n == 0:
            raise ValueError("interval not inside a single adjacent interval")
        S = 3 ** self.period_exponent(l)
        return positivity_measure_exact(S, self.beta(n), a, b), n

    def positive_measure_1d_any(self, l, a: float, b: float, max_level: int = 24) -> float:
        """Float measure of ``{V > 0}`` on ``[a, b]`` truncated after ``max_level`` levels."""
        S = 3.0 ** self.period_exponent(l)
        total = 0.0
        for n, lo, hi in adjacent_intervals_meeting(a, b, max_level):
            total += positivity_measure_exact(S, float(self.beta(n)), max(a, lo), min(b, hi))
        return total

    def distribution_on_box(self, box: Box):
        """Exact ``{value: mass}`` of ``V`` on a box inside one unit cube and one adjacent interval."""
        l = cube_index([(lo + hi) / 2 for lo, hi in zip(box.lo, box.hi)])
        if any(not (li <= lo and hi <= li + 1) for li, lo, hi in zip(l, box.lo, box.hi)):
            raise ValueError("box not inside a single unit cube")
        trans = Fraction(1)
        for lo, hi in zip(box.lo[1:], box.hi[1:]):
            trans *= as_fraction(hi) - as_fraction(lo)
        a, b = as_fraction(box.lo[0]) - l[0], as_fraction(box.hi[0]) - l[0]
        pos, _ = self.positive_measure_1d(l, a, b)
        vol = trans * (b - a)
        return {self.amplitude(l): pos * trans, 0.0: vol - pos * trans}

    def cell_average_x1(self, l, edges: np.ndarray, oversample: int = 729) -> np.ndarray:
        """Average of ``V`` over first-coordinate slabs ``[edges[i], edges[i+1]]`` of ``Q_1(l)``.

        Midpoint rule with ``oversample`` sub-samples per slab; the potential
        depends only on the first coordinate inside a unit cube.
        """
        edges = np.asarray(edges, dtype=float)
        k = np.arange(oversample) + 0.5
        out = np.empty(edges.size - 1)
        for i in range(edges.size - 1):
            a, b = edges[i], edges[i + 1]
            pts = np.tile(np.asarray(l, dtype=float) + 0.5, (oversample, 1))
            pts[:, 0] = l[0] + a + (b - a) * k / oversample
            out[i] = self.evaluate(pts).mean()
        return out


def locate_adjacent(x):
    """``(n, lo, hi)``: the closed adjacent interval containing ``x``, ``(0, None, None)`` if none."""
    if not (0 < x <= 1):
        raise ValueError("x must lie in (0, 1]")
    exact = isinstance(x, (Fraction, int))
    lo, w = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    for n in range(1, MAX_TERNARY_DEPTH + 1):
        t = w / 3
        if lo + t <= x <= lo + 2 * t:
            return n, lo + t, lo + 2 * t
        if x > lo + 2 * t:
            lo = lo + 2 * t
        w = t
    return 0, None, None


def adjacent_level_containing(a, b) -> int:
    """Level of the adjacent interval containing ``[a, b]`` in ``(0, 1]``, 0 if none."""
    n, lo, hi = locate_adjacent((a + b) / 2)
    return n if n and lo <= a and b <= hi else 0


def adjacent_intervals_meeting(a: float, b: float, max_level: int):
    """``(n, lo, hi)`` for adjacent intervals of levels ``<= max_level`` meeting ``[a, b]``."""
    out = []
    stack = [(0.0, 1.0, 0)]  # surviving intervals of the construction at depth k
    while stack:
        lo, hi, k = stack.pop()
        if k >= max_level or hi < a or lo > b:
            continue
        w = (hi - lo) / 3
        m_lo, m_hi = lo + w, lo + 2 * w
        if m_hi >= a and m_lo <= b:
            out.append((k + 1, m_lo, m_hi))
        stack.append((lo, m_lo, k + 1))
        stack.append((m_hi, hi, k + 1))
    return sorted(out)


# ------------------------------------------------------------ cell checks


@dataclass(frozen=True)
class CellFraction:
    analytic: Fraction
    measured: Fraction
    exact: bool


def positivity_fraction_on_cell(pot: ValphaPotential, l: Sequence[int], j: int, n: int,
                                k: Optional[int] = None) -> CellFraction:
    """Fraction of a level-``n`` cell inside ``D_j(l)`` where ``V > 0``.

    The cell has first-coordinate range ``[k 3^-n, (k+1) 3^-n]`` (local); by
    default the leftmost such cell in the leftmost level-``j`` interval.
    Requires ``j <= n`` and ``|l|_inf > n`` (whole periods on the cell).
    """
    if not (1 <= j <= n):
        raise ValueError("need 1 <= j <= n")
    if _linf(l) <= n:
        raise ValueError("need |l|_inf > n")
    if k is None:
        k = 3 ** (n - j)  # leftmost level-j interval is [3^-j, 2 3^-j]
    a, b = Fraction(k, 3 ** n), Fraction(k + 1, 3 ** n)
    lvl = adjacent_level_containing(a, b)
    if lvl != j:
        raise ValueError("cell not inside a level-j adjacent interval")
    S = 3 ** pot.period_exponent(l)
    beta = pot.beta(j)
    measured = positivity_measure_exact(S, beta, a, b) / (b - a)
    return CellFraction(beta, measured, beta_is_exact(pot.alpha, j))
