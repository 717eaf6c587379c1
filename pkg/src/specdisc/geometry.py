"""Boxes, balls, star-shaped domains, m-adic cells and capacity constants.

Cube convention: ``Q_r(y)`` is the closed cube ``y + [0, r]^d`` (lower corner
``y``, side ``r``).  With it the unit cubes ``Q_1(l)``, ``l`` in ``Z^d``, tile
space and the cube ``Q_{2r/sqrt(d)}(y - r a)``, ``a = d^{-1/2}(1,...,1)``, is
inscribed in the ball ``B_r(y)``.  :func:`symmetric_chart` maps a unit-chart
cell to the ``[-1, 1]^d`` chart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

Number = int | float | Fraction


# ---------------------------------------------------------------- boxes


@dataclass(frozen=True)
class Box:
    """Regular parallelepiped ``prod_k [lo_k, hi_k]``; endpoints may be Fractions."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("box bounds must be nonempty and of equal length")
        if any(not a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi on every axis")

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple]) -> "Box":
        bounds = list(bounds)
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self):
        v = 1
        for a, b in zip(self.lo, self.hi):
            v = v * (b - a)
        return v

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def intersect(self, other: "Box"):
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if any(not a < b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def product(self, other: "Box") -> "Box":
        return Box(self.lo + other.lo, self.hi + other.hi)

    def translate(self, shift: Sequence) -> "Box":
        return Box(tuple(a + s for a, s in zip(self.lo, shift)),
                   tuple(b + s for b, s in zip(self.hi, shift)))

    def to_record(self) -> dict:
        return {"lo": [_num_record(v) for v in self.lo], "hi": [_num_record(v) for v in self.hi]}


def _num_record(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else str(v)
    return v


def cube(corner: Sequence, side) -> Box:
    """``Q_side(corner)`` in the unit chart."""
    return Box(tuple(corner), tuple(c + side for c in corner))


def unit_cube(l: Sequence[int]) -> Box:
    return cube(tuple(Fraction(int(v)) for v in l), Fraction(1))


def inscribed_cube(center: Sequence[float], r: float) -> Box:
    """The cube inscribed in ``B_r(center)``: side ``2r/sqrt(d)``, centered at ``center``."""
    d = len(center)
    h = r / math.sqrt(d)
    return Box(tuple(c - h for c in center), tuple(c + h for c in center))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return ball_volume(self.dim, self.radius)


# ------------------------------------------------------- capacity constants


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / gamma_fn(d / 2 + 1)


def ball_volume(d: int, r: float) -> float:
    return unit_ball_volume(d) * r ** d


def _check_dim(d):
    if int(d) != d or d < 3:
        raise ValueError("dimension must be an integer >= 3")


def c_d(d: int) -> float:
    """Isocapacity constant: ``mes(F) <= c_d cap(F)^{d/(d-2)}``, equality for balls."""
    _check_dim(d)
    return (d * (d - 2) * unit_ball_volume(d) ** (2 / d)) ** (-d / (d - 2))


def cap_ball(d: int, r: float) -> float:
    """Harmonic capacity of the closed ball of radius ``r``: ``d (d-2) omega_d r^{d-2}``."""
    _check_dim(d)
    if not r > 0:
        raise ValueError("radius must be positive")
    return d * (d - 2) * unit_ball_volume(d) * r ** (d - 2)


# ------------------------------------------------------------ star domains


@dataclass(frozen=True)
class StarDomain:
    """Star-shaped domain sampled through its radial function ``r(omega)``."""

    directions: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.radii) <= 0):
            raise ValueError("radial function must be positive")

    @classmethod
    def from_function(cls, d: int, radial: Callable, n_dirs: int = 4096, seed: int = 0):
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_dirs, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return cls(dirs, np.asarray(radial(dirs), dtype=float))

    @classmethod
    def ball(cls, d: int, radius: float = 1.0, n_dirs: int = 256, seed: int = 0):
        return cls.from_function(d, lambda w: np.full(len(w), radius), n_dirs, seed)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def r_max(self) -> float:
        return float(np.max(self.radii))

    @property
    def r_min(self) -> float:
        return float(np.min(self.radii))

    @property
    def G(self) -> float:
        """``(r_max / r_min)^d``; equals 1 exactly for a ball."""
        return (self.r_max / self.r_min) ** self.dim


def gamma_from_tilde(gamma_tilde: Callable, star: StarDomain) -> Callable:
    """Capacity-side profile ``gamma(r) = (gamma_tilde(r) / G)^{(d-2)/d}``."""
    d, G = star.dim, star.G
    _check_dim(d)

    def gamma(r):
        return (gamma_tilde(r) / G) ** ((d - 2) / d)

    return gamma


@dataclass(frozen=True)
class GammaTrace:
    exponent: float
    radii: np.ndarray
    values: np.ndarray
    verdict: str
    window: tuple[int, int]
    note: str


def gamma_admissible(gamma: Callable, exponent: float, r0: float = 1.0, k_max: int = 40,
                     min_growth: float = 10.0, d: int | None = None) -> GammaTrace:
    """Finite surrogate for ``limsup_{r->0} r^{-e} gamma(r) = infinity``.

    Evaluates ``r_k^{-e} gamma(r_k)`` on ``r_k = 2^{-k} < r0``, ``k <= k_max``.
    The verdict is ``"diverges"`` when the trace sets new running maxima in the
    last quarter of the window and its final value exceeds ``min_growth``
    times the first one, ``"bounded"`` otherwise.  Only a window, never a proof.
    """
    if d is not None:
        allowed = (2.0, 2.0 * (d - 2) / d)
        if not any(math.isclose(exponent, e) for e in allowed):
            raise ValueError(f"exponent must be one of {allowed}")
    ks = np.array([k for k in range(1, k_max + 1) if 2.0 ** -k < r0])
    if ks.size < 4:
        raise ValueError("window too short; increase r0 or k_max")
    radii = 2.0 ** -ks.astype(float)
    g = np.array([float(gamma(r)) for r in radii])
    if np.any(g <= 0) or np.any(g >= 1):
        raise ValueError("gamma must take values in (0, 1)")
    vals = radii ** -exponent * g
    running = np.maximum.accumulate(vals)
    records = np.flatnonzero(np.diff(running) > 0) + 1
    tail_start = int(0.75 * vals.size)
    late_records = np.any(records >= tail_start)
    grows = vals[-1] > min_growth * vals[0]
    verdict = "diverges" if (late_records and grows) else "bounded"
    note = (f"window k={int(ks[0])}..{int(ks[-1])}; records in last quarter: {bool(late_records)}; "
            f"growth {vals[-1] / vals[0]:.3g} vs required {min_growth:g}")
    return GammaTrace(float(exponent), radii, vals, verdict, (int(ks[0]), int(ks[-1])), note)


# ---------------------------------------------------------- m-adic cells


MAX_CELL_BITS = 30


@dataclass(frozen=True)
class MadicCell:
    """``Q(xi, n)`` of the level-``n`` m-adic partition of ``Q_1(l)``.

    ``num`` holds integer numerators of the lower corner over ``m**n``.
    """

    m: int
    n: int
    num: tuple[int, ...]

    @property
    def side(self) -> Fraction:
        return Fraction(1, self.m ** self.n)

    @property
    def anchor(self) -> tuple[Fraction, ...]:
        den = self.m ** self.n
        return tuple(Fraction(k, den) for k in self.num)

    @property
    def box(self) -> Box:
        return cube(self.anchor, self.side)

    def to_record(self) -> dict:
        return {"num": list(self.num), "den": self.m ** self.n}


def _guard_cells(d, n, m):
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 and m >= 2")
    if d * n * math.log2(m) > MAX_CELL_BITS:
        raise ValueError("m-adic enumeration too large")


def madic_cells(l: Sequence[int], n: int, m: int = 3) -> list[MadicCell]:
    """All ``m**(d n)`` cells of the level-``n`` partition of ``Q_1(l)``, lexicographic."""
    d = len(l)
    _guard_cells(d, n, m)
    k = m ** n
    base = np.array([int(v) * k for v in l])
    idx = np.indices((k,) * d).reshape(d, -1).T + base
    return [MadicCell(m, n, tuple(int(v) for v in row)) for row in idx]


def symmetric_chart(cell: MadicCell, l: Sequence[int]) -> Box:
    """Image of a unit-chart cell of ``Q_1(l)`` in the chart ``l + [-1, 1]^d``."""
    b = cell.box
    return Box(tuple(2 * (a - li) - 1 + li for a, li in zip(b.lo, l)),
               tuple(2 * (c - li) - 1 + li for c, li in zip(b.hi, l)))


def _axis_range_inside(lo: Fraction, hi: Fraction, k: int) -> tuple[int, int]:
    """Cell indices ``i`` with ``[i/k, (i+1)/k] within [lo, hi]`` (inclusive range)."""
    a = math.ceil(Fraction(lo) * k)
    b = math.floor(Fraction(hi) * k) - 1
    return a, b


def xi_subset(l: Sequence[int], n: int, region: Sequence[Box], m: int = 3) -> list[MadicCell]:
    """Cells of the level-``n`` partition of ``Q_1(l)`` contained in a union of boxes.

    Exact rational test.  Cells inside a single box are found from index
    ranges; cells covered only jointly by several boxes are confirmed by
    coordinate compression.
    """
    d = len(l)
    _guard_cells(d, n, m)
    k = m ** n
    home = unit_cube(l)
    boxes = [b.intersect(home) for b in region]
    boxes = [b for b in boxes if b is not None]
    if not boxes:
        return []
    found: set[tuple[int, ...]] = set()
    touched: set[tuple[int, ...]] = set()
    base = [int(v) * k for v in l]
    for b in boxes:
        inside = [_axis_range_inside(lo, hi, k) for lo, hi in zip(b.lo, b.hi)]
        if all(a <= c for a, c in inside):
            for idx in np.ndindex(*[c - a + 1 for a, c in inside]):
                found.add(tuple(a + i for (a, _), i in zip(inside, idx)))
        if len(boxes) > 1:
            near = [(math.floor(Fraction(lo) * k), math.ceil(Fraction(hi) * k) - 1)
                    for lo, hi in zip(b.lo, b.hi)]
            for idx in np.ndindex(*[c - a + 1 for a, c in near]):
                touched.add(tuple(a + i for (a, _), i in zip(near, idx)))
    for key in touched - found:
        cell = cube(tuple(Fraction(v, k) for v in key), Fraction(1, k))
        if covered_by_union(cell, boxes):
            found.add(key)
    # keys above are absolute numerators already (boxes carry absolute coordinates)
    cells = [MadicCell(m, n, key) for key in sorted(found)]
    lo_ok = [all(b <= v < b + k for v, b in zip(c.num, base)) for c in cells]
    return [c for c, ok in zip(cells, lo_ok) if ok]


def covered_by_union(target: Box, boxes: Sequence[Box]) -> bool:
    """Exact test of ``target`` being contained in the union of ``boxes``."""
    clipped = [b.intersect(target) for b in boxes]
    clipped = [b for b in clipped if b is not None]
    if not clipped:
        return False
    if any(b.contains_box(target) for b in clipped):
        return True
    cuts = []
    for ax in range(target.dim):
        pts = {target.lo[ax], target.hi[ax]}
        for b in clipped:
            pts.add(b.lo[ax])
            pts.add(b.hi[ax])
        cuts.append(sorted(pts))
    for idx in np.ndindex(*[len(c) - 1 for c in cuts]):
        mid = [(cuts[ax][i] + cuts[ax][i + 1]) / 2 for ax, i in enumerate(idx)]
        if not any(all(b.lo[ax] <= mid[ax] <= b.hi[ax] for ax in range(target.dim)) for b in clipped):
            return False
    return True
