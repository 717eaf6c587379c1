"""Distribution functions and monotone rearrangements on finite spaces.

For a nonnegative field ``W`` on a :class:`~specdisc.measure.WeightedSpace`::

    lambda_lower(s) = mu{W <= s}          lambda_upper(s) = mu{W >= s}
    W_star(t)    = sup{s > 0 : lambda_lower(s) <  t}
    Wbar_star(t) = sup{s > 0 : lambda_upper(s) >= t}

On a finite space both suprema are attained on the value set, so everything
reduces to one sort and two prefix-mass scans (:class:`DistributionProfile`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .measure import WeightedSpace, fsum


class ScalarField:
    """Nonnegative values attached to the atoms of a space (same order)."""

    def __init__(self, values):
        values = np.array(values, dtype=float).ravel()
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("field values must be finite and nonnegative")
        values.setflags(write=False)
        self.values = values

    def __len__(self):
        return self.values.size

    @classmethod
    def from_function(cls, space: WeightedSpace, fn: Callable) -> "ScalarField":
        """Evaluate ``fn`` at the cell centers of a grid space."""
        return cls(np.asarray(fn(space.centers), dtype=float))

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(c * self.values)


def field_values(field, space: WeightedSpace) -> np.ndarray:
    """Coerce ``field`` (ScalarField, array, callable or None) to a value array."""
    if field is None:
        if space.values is None:
            raise ValueError("space carries no values and no field was given")
        vals = space.values
    elif isinstance(field, ScalarField):
        vals = field.values
    elif callable(field):
        vals = ScalarField.from_function(space, field).values
    else:
        vals = ScalarField(field).values
    if vals.size != len(space):
        raise ValueError("field and space differ in size")
    return vals


@dataclass(frozen=True)
class DistributionProfile:
    """Distinct values with their lower and upper level-set masses.

    ``lower[i] = mu{W <= levels[i]}``, ``upper[i] = mu{W >= levels[i]}`` and
    ``tie[i] = mu{W = levels[i]}``.
    """

    levels: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tie: np.ndarray
    total_mass: float

    @classmethod
    def of(cls, field, space: WeightedSpace) -> "DistributionProfile":
        vals = field_values(field, space)
        levels, inverse = np.unique(vals, return_inverse=True)
        tie = np.zeros(levels.size, dtype=np.longdouble)
        np.add.at(tie, inverse, space.masses.astype(np.longdouble))
        lower = np.cumsum(tie)
        upper = np.cumsum(tie[::-1])[::-1]
        total = space.total_mass
        lower = lower.astype(float)
        upper = upper.astype(float)
        # pin the ends to the compensated total so t = total_mass is attainable
        lower[-1] = total
        upper[0] = total
        return cls(levels, lower, upper, tie.astype(float), total)


def _check_t(t: float, total: float):
    if not (0 < t <= total):
        raise ValueError(f"t={t!r} outside (0, {total!r}]")


def lambda_lower(field, space: WeightedSpace, s: float) -> float:
    """Mass of the sublevel set ``{W <= s}``."""
    vals = field_values(field, space)
    return fsum(space.masses[vals <= s])


def lambda_upper(field, space: WeightedSpace, s: float) -> float:
    """Mass of the superlevel set ``{W >= s}``."""
    vals = field_values(field, space)
    return fsum(space.masses[vals >= s])


def _w_star(prof: DistributionProfile, t: float) -> float:
    # smallest level whose sublevel mass reaches t
    i = int(np.searchsorted(prof.lower, t, side="left"))
    i = min(i, prof.levels.size - 1)
    return float(prof.levels[i])


def _wbar_star(prof: DistributionProfile, t: float) -> float:
    # largest level whose superlevel mass still reaches t; 0 if none is positive
    ok = np.flatnonzero(prof.upper >= t)
    if ok.size == 0:
        return 0.0
    v = float(prof.levels[ok[-1]])
    return v if v > 0 else 0.0


def rearr_nondecreasing(field, space: WeightedSpace, t: float) -> float:
    """Nondecreasing rearrangement ``W_star(t)``, ``0 < t <= mu(X)``."""
    _check_t(t, space.total_mass)
    return _w_star(DistributionProfile.of(field, space), t)


def rearr_nonincreasing(field, space: WeightedSpace, t: float) -> float:
    """Nonincreasing rearrangement ``Wbar_star(t)``, ``0 < t <= mu(X)``."""
    _check_t(t, space.total_mass)
    return _wbar_star(DistributionProfile.of(field, space), t)


def wbar_star_any(field, space: WeightedSpace, t: float) -> float:
    """``Wbar_star(t)`` for any ``t > 0``; it vanishes once ``t > mu(X)``."""
    if t <= 0:
        raise ValueError("t must be positive")
    if t > space.total_mass:
        return 0.0
    return _wbar_star(DistributionProfile.of(field, space), t)


def rearrangement_table(field, space: WeightedSpace, ts: Sequence[float]) -> list[dict]:
    """``t, W_star, Wbar_star, kappa_minus`` rows sharing one profile."""
    prof = DistributionProfile.of(field, space)
    vals = field_values(field, space)
    rows = []
    for t in ts:
        _check_t(t, prof.total_mass)
        ws = _w_star(prof, t)
        rows.append({
            "t": float(t),
            "W_star": ws,
            "Wbar_star": _wbar_star(prof, t),
            "kappa_minus": fsum(space.masses[vals < ws]),
        })
    return rows


def strict_sublevel(field, space: WeightedSpace, t: float) -> tuple[np.ndarray, float]:
    """The set ``K^- = {W < W_star(t)}`` (atom ids) and its mass ``kappa^-``."""
    vals = field_values(field, space)
    ws = rearr_nondecreasing(vals, space, t)
    mask = vals < ws
    return space.ids[mask], fsum(space.masses[mask])


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    ok: bool


def _disjoint_parts(space: WeightedSpace, parts) -> list[np.ndarray]:
    out = []
    seen = np.zeros(len(space), dtype=bool)
    for p in parts:
        p = np.asarray(p)
        idx = np.flatnonzero(p) if p.dtype == bool else np.unique(p.astype(np.int64))
        if idx.size == 0:
            raise ValueError("empty part")
        if np.any(seen[idx]):
            raise ValueError("parts overlap")
        seen[idx] = True
        out.append(idx)
    return out


def check_union_inequality(field, space: WeightedSpace, parts, t: float) -> InequalityCheck:
    """Union bound for the nonincreasing rearrangement.

    ``Wbar_star(t mu(U), U) >= min_n Wbar_star(t mu(P_n), P_n)`` for disjoint
    parts ``P_n`` (index arrays or masks into ``space``) with union ``U`` and
    ``0 < t < 1``.
    """
    if not (0 < t < 1):
        raise ValueError("t must lie in (0, 1)")
    vals = field_values(field, space)
    idx = _disjoint_parts(space, parts)
    union = np.concatenate(idx)
    u_space = space.subset(union)
    lhs = _wbar_star(DistributionProfile.of(vals[union], u_space), t * u_space.total_mass)
    rhs = np.inf
    for p in idx:
        sub = space.subset(p)
        rhs = min(rhs, _wbar_star(DistributionProfile.of(vals[p], sub), t * sub.total_mass))
    return InequalityCheck(lhs, float(rhs), lhs >= rhs)


def check_inclusion_monotonicity(field, space: WeightedSpace, inner, t: float) -> InequalityCheck:
    """``Wbar_star(t, inner) <= Wbar_star(t, space)`` for a sub-collection of atoms."""
    vals = field_values(field, space)
    inner = np.asarray(inner)
    idx = np.flatnonzero(inner) if inner.dtype == bool else np.unique(inner.astype(np.int64))
    sub = space.subset(idx)
    small = wbar_star_any(vals[idx], sub, t)
    big = wbar_star_any(vals, space, t)
    return InequalityCheck(small, big, small <= big)
