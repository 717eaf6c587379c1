"""Finite measure spaces.

A :class:`WeightedSpace` is a finite list of atoms with positive masses.
Spaces built from a grid additionally remember the cell of every atom, which
is what :func:`refine` and :func:`restrict` need.  Everything is array backed
so that grids with a few million cells stay cheap; :attr:`WeightedSpace.atoms`
materialises :class:`Atom` records on demand.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Atom:
    id: int
    mass: float
    value: Optional[float] = None


def fsum(values) -> float:
    """Correctly rounded sum (compensated summation)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def prefix_sums(masses: np.ndarray) -> np.ndarray:
    """Running sums accumulated in extended precision."""
    return np.cumsum(np.asarray(masses, dtype=np.longdouble)).astype(float)


class WeightedSpace:
    """Immutable finite measure space.

    Parameters
    ----------
    masses : array of positive floats
    ids : optional integer ids (default ``0..n-1``), must be unique
    values : optional per-atom scalar (the attached field)
    lo, hi : optional ``(n, d)`` arrays with the cell of every atom
    """

    def __init__(self, masses, ids=None, values=None, lo=None, hi=None):
        masses = np.array(masses, dtype=float).ravel()
        if masses.size == 0:
            raise ValueError("a weighted space needs at least one atom")
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
            raise ValueError("atom masses must be positive and finite")
        if ids is None:
            ids = np.arange(masses.size)
        ids = np.array(ids, dtype=np.int64).ravel()
        if ids.size != masses.size:
            raise ValueError("ids and masses differ in length")
        if np.unique(ids).size != ids.size:
            raise ValueError("atom ids must be unique")
        if values is not None:
            values = np.array(values, dtype=float).ravel()
            if values.size != masses.size:
                raise ValueError("values and masses differ in length")
        if (lo is None) != (hi is None):
            raise ValueError("cell bounds need both lo and hi")
        if lo is not None:
            lo = np.array(lo, dtype=float).reshape(masses.size, -1)
            hi = np.array(hi, dtype=float).reshape(masses.size, -1)
            if np.any(hi <= lo):
                raise ValueError("cell volumes must be positive")
        for arr in (masses, ids, values, lo, hi):
            if arr is not None:
                arr.setflags(write=False)
        self.masses = masses
        self.ids = ids
        self.values = values
        self.lo = lo
        self.hi = hi
        self.total_mass = fsum(masses)

    def __len__(self):
        return self.masses.size

    def __repr__(self):
        kind = "grid" if self.is_grid else "atomic"
        return f"WeightedSpace({len(self)} atoms, {kind}, total_mass={self.total_mass!r})"

    @property
    def is_grid(self) -> bool:
        return self.lo is not None

    @property
    def dim(self) -> Optional[int]:
        return None if self.lo is None else self.lo.shape[1]

    @property
    def centers(self) -> np.ndarray:
        if self.lo is None:
            raise ValueError("space has no cell geometry")
        return 0.5 * (self.lo + self.hi)

    @property
    def atoms(self) -> list[Atom]:
        vals = self.values if self.values is not None else [None] * len(self)
        return [Atom(int(i), float(m), None if v is None else float(v))
                for i, m, v in zip(self.ids, self.masses, vals)]

    def with_values(self, values) -> "WeightedSpace":
        return WeightedSpace(self.masses, self.ids, values, self.lo, self.hi)

    def subset(self, index) -> "WeightedSpace":
        """Sub-space on the atoms selected by a boolean mask or index array."""
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        if index.size == 0:
            raise ValueError("empty restriction")

        def pick(a):
            return None if a is None else a[index]

        return WeightedSpace(self.masses[index], self.ids[index], pick(self.values),
                             pick(self.lo), pick(self.hi))

    def to_record(self) -> dict:
        """JSON-ready record ``{atoms: [{id, mass, value}], total_mass}``."""
        atoms = []
        for a in self.atoms:
            rec = {"id": a.id, "mass": a.mass}
            if a.value is not None:
                rec["value"] = a.value
            atoms.append(rec)
        return {"atoms": atoms, "total_mass": self.total_mass}

    @classmethod
    def from_record(cls, record: dict) -> "WeightedSpace":
        atoms = record["atoms"]
        masses = [a["mass"] for a in atoms]
        ids = [a["id"] for a in atoms]
        values = None
        if atoms and all("value" in a for a in atoms):
            values = [a["value"] for a in atoms]
        return cls(masses, ids, values)


def _as_box(box) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(box, "lo") and hasattr(box, "hi"):
        lo, hi = box.lo, box.hi
    else:
        box = list(box)
        if len(box) == 2 and np.isscalar(box[0]) and np.isscalar(box[1]):
            box = [box]
        lo = [b[0] for b in box]
        hi = [b[1] for b in box]
    lo = np.array([float(v) for v in lo])
    hi = np.array([float(v) for v in hi])
    if lo.size == 0 or np.any(hi <= lo):
        raise ValueError("empty box")
    return lo, hi


def grid_axes(box, resolution) -> list[np.ndarray]:
    """Cell edges along every axis of a uniform grid on ``box``."""
    lo, hi = _as_box(box)
    res = np.broadcast_to(np.asarray(resolution, dtype=int), lo.shape)
    if np.any(res < 1):
        raise ValueError("resolution must be >= 1 on every axis")
    return [np.linspace(a, b, n + 1) for a, b, n in zip(lo, hi, res)]


def build_grid(box, resolution, density: float | Callable | Sequence = 1.0) -> WeightedSpace:
    """Uniform grid measure on an axis-aligned box.

    One atom per cell with mass ``density * cell volume``; atoms are ordered
    by lexicographic cell index and the id is the flat (C-order) index.
    ``density`` may be a constant, an array with one weight per cell (in that
    order) or a callable evaluated at cell midpoints with shape ``(n, d)``.
    Cells of zero density are dropped.
    """
    edges = grid_axes(box, resolution)
    mesh_lo = np.meshgrid(*[e[:-1] for e in edges], indexing="ij")
    mesh_hi = np.meshgrid(*[e[1:] for e in edges], indexing="ij")
    lo = np.stack([m.ravel() for m in mesh_lo], axis=1)
    hi = np.stack([m.ravel() for m in mesh_hi], axis=1)
    vol = np.prod(hi - lo, axis=1)
    if callable(density):
        w = np.asarray(density(0.5 * (lo + hi)), dtype=float).ravel()
    else:
        w = np.broadcast_to(np.asarray(density, dtype=float).ravel(), vol.shape)
    if w.shape != vol.shape:
        raise ValueError("density has the wrong number of cells")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("density must be nonnegative and finite")
    mass = w * vol
    keep = mass > 0
    if not np.any(keep):
        raise ValueError("grid has zero total mass")
    ids = np.flatnonzero(keep)
    return WeightedSpace(mass[keep], ids, None, lo[keep], hi[keep])


def refine(space: WeightedSpace, k: int) -> WeightedSpace:
    """Split every cell into ``k**d`` congruent children of equal mass.

    Attached values are inherited, so the distribution function of any
    cell-wise constant field is unchanged.
    """
    if not space.is_grid:
        raise ValueError("refine needs a space with cell geometry")
    if int(k) != k or k < 2:
        raise ValueError("refinement factor must be an integer >= 2")
    k = int(k)
    n, d = space.lo.shape
    offsets = np.array(list(itertools.product(range(k), repeat=d)), dtype=float)  # (k^d, d)
    width = (space.hi - space.lo) / k
    lo = space.lo[:, None, :] + offsets[None, :, :] * width[:, None, :]
    hi = lo + width[:, None, :]
    # last child per axis reuses the parent edge exactly
    last = offsets == k - 1
    hi = np.where(last[None, :, :], space.hi[:, None, :], hi)
    masses = np.repeat(space.masses / k ** d, k ** d)
    values = None if space.values is None else np.repeat(space.values, k ** d)
    return WeightedSpace(masses, None, values, lo.reshape(-1, d), hi.reshape(-1, d))


def restrict(space: WeightedSpace, region) -> WeightedSpace:
    """Atoms whose cell center lies in ``region``.

    ``region`` is a boolean mask, a callable on centers ``(n, d) -> bool``, or a
    box given as ``[(lo, hi), ...]`` / an object with ``lo``/``hi`` attributes
    (closed containment test).
    """
    if isinstance(region, np.ndarray) and region.dtype == bool:
        mask = region
    else:
        c = space.centers
        if callable(region):
            mask = np.asarray(region(c), dtype=bool)
        else:
            lo, hi = _as_box(region)
            mask = np.all((c >= lo) & (c <= hi), axis=1)
    if not np.any(mask):
        raise ValueError("empty restriction")
    return space.subset(mask)
