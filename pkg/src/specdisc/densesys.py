"""Dense systems of parallelepipeds and their witness search.

A system ``{D_n}`` in the unit cube ``Q_1(l)`` is (log_m, theta)-dense when
every cube ``Q_r(z)`` in ``Q_1(l)`` meets some parallelepiped ``Pi`` of some
``D_j``, ``j <= floor(log_m(1/(theta r)))``, in a set that contains a cube of
side ``theta r``.  Cubes follow the unit chart of :mod:`specdisc.geometry`.

Geometry is exact (Fractions).  The witness search prefilters in floating
point with a little slack and confirms every hit in rational arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import Box, cube, unit_cube

MAX_CANTOR_LEVEL = 20
MAX_EXPLICIT_BOXES = 200_000


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def cantor_adjacent(n: int) -> list[Box]:
    """Closures of the ``2^(n-1)`` intervals removed at step ``n`` of the middle-thirds construction."""
    if int(n) != n or n < 1:
        raise ValueError("level must be an integer >= 1")
    if n > MAX_CANTOR_LEVEL:
        raise ValueError(f"level capped at {MAX_CANTOR_LEVEL}")
    starts = [0]  # left ends (numerators over 3^(k-1)) of the surviving intervals
    for _ in range(n - 1):
        starts = [3 * a for a in starts] + [3 * a + 2 for a in starts]
    starts.sort()
    den = 3 ** n
    return [Box((Fraction(3 * a + 1, den),), (Fraction(3 * a + 2, den),)) for a in starts]


@dataclass(frozen=True)
class Witness:
    j: int
    box: Box                 # the parallelepiped Pi
    corner: tuple            # lower corner s of the inner cube Q_{theta r}(s)
    side: Fraction

    def to_record(self) -> dict:
        return {"j": self.j, "box": self.box.to_record(), "corner": [str(c) for c in self.corner],
                "side": str(self.side)}


class DenseSystem:
    """Levels ``D_1, D_2, ...`` of boxes inside the unit cube ``Q_1(l)``.

    ``level_fn(n)`` returns the boxes of ``D_n``.  Product systems keep their
    factors; their witness search runs per factor (a product box of level
    ``max n_i`` works as soon as every factor has a witness of level ``n_i``).
    """

    def __init__(self, m: int, theta, level_fn: Callable[[int], list[Box]], home: Sequence[int],
                 name: str = "system", factors: Optional[list["DenseSystem"]] = None,
                 removed: frozenset = frozenset()):
        if int(m) != m or m < 2:
            raise ValueError("base m must be an integer >= 2")
        theta = _frac(theta)
        if not (0 < theta < 1):
            raise ValueError("theta must lie in (0, 1)")
        self.m = int(m)
        self.theta = theta
        self._level_fn = level_fn
        self.home = tuple(int(v) for v in home)
        self.name = name
        self.factors = factors
        self.removed = frozenset(removed)
        self._cache: dict[int, tuple[list[Box], np.ndarray, np.ndarray]] = {}

    @property
    def dim(self) -> int:
        return len(self.home)

    @property
    def ambient(self) -> Box:
        return unit_cube(self.home)

    def level(self, n: int) -> list[Box]:
        if n < 1:
            raise ValueError("levels start at 1")
        if n in self.removed:
            return []
        return self._level_fn(n)

    def _arrays(self, n):
        if n not in self._cache:
            boxes = self.level(n)
            lo = np.array([[float(v) for v in b.lo] for b in boxes]).reshape(len(boxes), self.dim)
            hi = np.array([[float(v) for v in b.hi] for b in boxes]).reshape(len(boxes), self.dim)
            self._cache[n] = (boxes, lo, hi)
        return self._cache[n]

    def without_levels(self, levels) -> "DenseSystem":
        """Same system with the listed levels emptied (negative controls)."""
        return DenseSystem(self.m, self.theta, self._level_fn, self.home, self.name + "-broken",
                           None, self.removed | frozenset(levels))

    def with_theta(self, theta) -> "DenseSystem":
        factors = None if self.factors is None else [f.with_theta(theta) for f in self.factors]
        return DenseSystem(self.m, theta, self._level_fn, self.home, self.name, factors, self.removed)

    def check_structure(self, levels: int) -> bool:
        """Every box of ``D_1..D_levels`` lies in the ambient cube."""
        amb = self.ambient
        return all(amb.contains_box(b) for n in range(1, levels + 1) for b in self.level(n))


def cantor_system(theta=Fraction(1, 9), home: int = 0) -> DenseSystem:
    """Cantor adjacent intervals in ``[l, l+1]``, base 3."""
    def level(n):
        return [b.translate((home,)) for b in cantor_adjacent(n)] if home else cantor_adjacent(n)
    return DenseSystem(3, theta, level, (home,), name="cantor")


def cylinder_extend(system: DenseSystem, extra_home: Sequence[int]) -> DenseSystem:
    """``{D_n x Q_1(y_2)}`` in the product ambient cube."""
    extra = unit_cube(extra_home)
    fn = lambda n: [b.product(extra) for b in system.level(n)]
    return DenseSystem(system.m, system.theta, fn, system.home + tuple(int(v) for v in extra_home),
                       name=system.name + "-cylinder")


def index_patterns(I: int, N: int) -> list[tuple[int, ...]]:
    """Tuples in ``{1..N}^I`` with maximum exactly ``N``; there are ``N^I - (N-1)^I``."""
    if I < 1 or N < 1:
        raise ValueError("need I >= 1 and N >= 1")
    return [t for t in itertools.product(range(1, N + 1), repeat=I) if max(t) == N]


def product_combine(systems: Sequence[DenseSystem]) -> DenseSystem:
    """Product system: ``D_N`` is the union over patterns with max ``N`` of factor products."""
    systems = list(systems)
    if not systems:
        raise ValueError("need at least one system")
    if len(systems) == 1:
        return systems[0]
    m = systems[0].m
    if any(s.m != m for s in systems):
        raise ValueError("factor systems must share the base m")
    theta = min(s.theta for s in systems)

    def level(N):
        out = []
        for pat in index_patterns(len(systems), N):
            parts = [s.level(n) for s, n in zip(systems, pat)]
            count = math.prod(len(p) for p in parts)
            if len(out) + count > MAX_EXPLICIT_BOXES:
                raise ValueError("product level too large to enumerate explicitly")
            for combo in itertools.product(*parts):
                b = combo[0]
                for c in combo[1:]:
                    b = b.product(c)
                out.append(b)
        return out

    home = tuple(v for s in systems for v in s.home)
    return DenseSystem(m, theta, level, home, name="product", factors=systems)


# ----------------------------------------------------------------- witness


def j_bound(m: int, theta, r) -> int:
    """``floor(log_m(1/(theta r)))``: largest ``j`` with ``m^j theta r <= 1`` (exact)."""
    x = _frac(theta) * _frac(r)
    j = 0
    while m ** (j + 1) * x <= 1:
        j += 1
    return j


def check_r(system: DenseSystem, r) -> None:
    r = _frac(r)
    limit = min(Fraction(1), 1 / (system.theta * system.m ** 2))
    if not (0 < r < limit):
        raise ValueError(f"r must lie in (0, {float(limit)})")


def _exact_witness(box: Box, z, r, side) -> Optional[tuple]:
    corner = []
    for a, b, zk in zip(box.lo, box.hi, z):
        lo, hi = max(a, zk), min(b, zk + r)
        if hi - lo < side:
            return None
        corner.append(lo)
    return tuple(corner)


def _search(system: DenseSystem, z, r, jmax, theta) -> Optional[Witness]:
    zf = np.array([float(v) for v in z])
    rf = float(r)
    side = theta * r
    sf = float(side)
    for j in range(1, jmax + 1):
        boxes, lo, hi = system._arrays(j)
        if not boxes:
            continue
        overlap = np.minimum(hi, zf + rf) - np.maximum(lo, zf)
        cand = np.flatnonzero(np.all(overlap >= sf * (1 - 1e-9) - 1e-15, axis=1))
        for i in cand:
            corner = _exact_witness(boxes[i], z, r, side)
            if corner is not None:
                return Witness(j, boxes[i], corner, side)
    return None


def witness(system: DenseSystem, z: Sequence, r) -> Optional[Witness]:
    """First witness for ``Q_r(z)`` in order of level, then box order; ``None`` if absent."""
    check_r(system, r)
    z = tuple(_frac(v) for v in z)
    r = _frac(r)
    if len(z) != system.dim:
        raise ValueError("cube dimension mismatch")
    if not system.ambient.contains_box(cube(z, r)):
        raise ValueError("cube not inside the ambient cube")
    jmax = j_bound(system.m, system.theta, r)
    if system.factors is None:
        return _search(system, z, r, jmax, system.theta)
    # per-factor witnesses; the product box sits at level max j_i
    parts, k = [], 0
    for f in system.factors:
        zf = z[k:k + f.dim]
        k += f.dim
        w = _search(f, zf, r, jmax, system.theta)
        if w is None:
            return None
        parts.append(w)
    box = parts[0].box
    for w in parts[1:]:
        box = box.product(w.box)
    corner = tuple(c for w in parts for c in w.corner)
    return Witness(max(w.j for w in parts), box, corner, system.theta * r)


def validate_witness(system: DenseSystem, z, r, w: Witness) -> bool:
    """Independent exact check of the three inclusion conditions and the level bound."""
    z = tuple(_frac(v) for v in z)
    r = _frac(r)
    if w.j < 1 or w.j > j_bound(system.m, system.theta, r):
        return False
    if w.side != system.theta * r:
        return False
    inner = cube(w.corner, w.side)
    if not (w.box.contains_box(inner) and cube(z, r).contains_box(inner)):
        return False
    if system.factors is None:
        return w.box in system.level(w.j)
    # a product box belongs to D_{max n_i} when each factor belongs to some D_{n_i}, n_i <= j
    k = 0
    for f in system.factors:
        fb = Box(w.box.lo[k:k + f.dim], w.box.hi[k:k + f.dim])
        k += f.dim
        if not any(fb in f.level(n) for n in range(1, w.j + 1)):
            return False
    return True


# ------------------------------------------------------------ verification


@dataclass
class VerifyReport:
    tested: int = 0
    failed: int = 0
    worst_slack: float = math.inf   # min over hits of overlap - theta r (relative to theta r)
    max_j: int = 0
    failures: list = field(default_factory=list)

    def to_record(self, limit: int = 20) -> dict:
        return {"tested": self.tested, "failed": self.failed, "worst_slack": self.worst_slack,
                "max_j": self.max_j,
                "failures": [{"z": [float(v) for v in z], "r": float(r)} for z, r in self.failures[:limit]]}


def endpoint_samples(system: DenseSystem, max_level: int = 6, eps: float = 1e-6) -> np.ndarray:
    """Triadic-type endpoints of the first levels, shifted by ``0, +-eps``, per axis."""
    pts = set()
    for ax in range(system.dim):
        for n in range(1, max_level + 1):
            k = system.m ** n
            for i in range(k + 1):
                pts.add(i / k)
    base = np.array(sorted(pts))
    return np.unique(np.concatenate([base, base - eps, base + eps]))


def sample_cubes(system: DenseSystem, samples: int, seed: int = 0, r_min: float = 1e-3,
                 r_max: float = 0.999, adversarial_fraction: float = 0.5):
    """Seeded cubes ``(z, r)`` with ``Q_r(z)`` in the ambient cube.

    ``r`` follows a log-uniform law; half of the cubes have a face aligned
    (up to ``+-eps``) with an endpoint of an early level, either at the lower
    corner or at the upper corner.
    """
    limit = float(min(Fraction(1), 1 / (system.theta * system.m ** 2)))
    r_max = min(r_max, limit * (1 - 1e-12))
    rng = np.random.default_rng(seed)
    d = system.dim
    home = np.array(system.home, dtype=float)
    ends = endpoint_samples(system)
    n_adv = int(samples * adversarial_fraction)
    r = np.exp(rng.uniform(math.log(r_min), math.log(r_max), size=samples))
    z = rng.uniform(0, 1, size=(samples, d)) * (1 - r)[:, None]
    for i in range(n_adv):
        for ax in range(d):
            e = ends[rng.integers(ends.size)]
            z[i, ax] = e if rng.random() < 0.5 else e - r[i]
    z = np.clip(z, 0.0, (1 - r)[:, None])
    # critical radii: cube side a power of m over theta-scale
    crit = np.array([system.m ** -k for k in range(1, 8)], dtype=float)
    crit = crit[(crit > r_min) & (crit < r_max)]
    for i in range(min(len(crit) * 10, n_adv)):
        r[i] = crit[i % len(crit)] * (1 - 1e-9) if len(crit) else r[i]
        z[i] = np.clip(z[i], 0.0, 1 - r[i])
    return z + home, r


def verify_system(system: DenseSystem, samples: int = 10_000, seed: int = 0,
                  r_min: float = 1e-3, r_max: float = 0.999) -> VerifyReport:
    """Run the witness search on seeded samples; every hit is re-validated exactly."""
    z_all, r_all = sample_cubes(system, samples, seed, r_min, r_max)
    rep = VerifyReport()
    for z, r in zip(z_all, r_all):
        rep.tested += 1
        rq = Fraction(float(r))
        zq = tuple(min(max(Fraction(float(v)), Fraction(h)), h + 1 - rq)
                   for v, h in zip(z, system.home))
        w = witness(system, zq, rq)
        if w is None or not validate_witness(system, zq, rq, w):
            rep.failed += 1
            rep.failures.append((zq, rq))
            continue
        rep.max_j = max(rep.max_j, w.j)
        inner = [min(b, zk + rq) - max(a, zk) for a, b, zk in zip(w.box.lo, w.box.hi, zq)]
        rep.worst_slack = min(rep.worst_slack, float(min(inner) / w.side) - 1.0)
    return rep
