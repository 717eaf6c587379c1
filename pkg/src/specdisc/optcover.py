"""Minimal integral of a nonnegative field over sets of prescribed mass.

``I_W(t) = inf{ integral_E W dmu : mu(E) >= t }``.  For non-atomic measures the
infimum equals

    J_W(t) = integral_{W < W_star(t)} W dmu + (t - kappa^-(t)) W_star(t),

attained by the sublevel set ``{W < W_star(t)}`` topped up with mass from the
tie layer ``{W = W_star(t)}``.  On an atomic space this is the fractional
relaxation (one atom may be taken partially); :func:`brute_force_I` and
:func:`greedy_I` give the integral counterparts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measure import WeightedSpace, fsum
from .rearrange import DistributionProfile, _w_star, _wbar_star, field_values

MAX_BRUTE_FORCE_ATOMS = 20


@dataclass(frozen=True)
class CoverSolution:
    value: float
    w_star: float
    kappa_minus: float
    full_ids: tuple[int, ...]
    fractional: Optional[tuple[int, float]]
    achieved_mass: float


def _check_open(t, total):
    if not (0 < t < total):
        raise ValueError(f"t={t!r} outside (0, {total!r})")


def solve_J(field, space: WeightedSpace, t: float) -> CoverSolution:
    """Optimal fractional cover of mass exactly ``t``.

    Atoms with ``W < W_star(t)`` are taken whole; the remaining mass
    ``t - kappa^-`` comes from the tie layer, consumed in increasing id order
    with only the last atom taken fractionally.
    """
    vals = field_values(field, space)
    _check_open(t, space.total_mass)
    ws = _w_star(DistributionProfile.of(vals, space), t)
    below = vals < ws
    kappa = fsum(space.masses[below])
    value = fsum(vals[below] * space.masses[below]) + (t - kappa) * ws

    full = list(space.ids[below])
    fractional = None
    need = t - kappa
    tie_idx = np.flatnonzero(vals == ws)
    tie_idx = tie_idx[np.argsort(space.ids[tie_idx], kind="stable")]
    taken = [kappa]
    for i in tie_idx:
        if need <= 0:
            break
        m = space.masses[i]
        if m <= need:
            full.append(space.ids[i])
            taken.append(m)
            need -= m
        else:
            fractional = (int(space.ids[i]), need / m)
            taken.append(need)
            need = 0.0
    return CoverSolution(
        value=value,
        w_star=ws,
        kappa_minus=kappa,
        full_ids=tuple(int(i) for i in sorted(full)),
        fractional=fractional,
        achieved_mass=math.fsum(taken),
    )


def brute_force_I(field, space: WeightedSpace, t: float) -> float:
    """Exact minimum of the integral over atom subsets with ``mu(E) >= t``."""
    vals = field_values(field, space)
    n = len(space)
    if n > MAX_BRUTE_FORCE_ATOMS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_FORCE_ATOMS} atoms, got {n}")
    _check_open(t, space.total_mass)
    subsets = np.arange(1 << n, dtype=np.int64)
    mass = np.zeros(subsets.size, dtype=np.longdouble)
    cost = np.zeros(subsets.size, dtype=np.longdouble)
    for i in range(n):
        bit = ((subsets >> i) & 1).astype(bool)
        mass[bit] += space.masses[i]
        cost[bit] += vals[i] * space.masses[i]
    feasible = mass >= t
    return float(cost[feasible].min())


def greedy_I(field, space: WeightedSpace, t: float) -> float:
    """Integral over the shortest prefix, in nondecreasing ``W`` order, of mass ``>= t``."""
    vals = field_values(field, space)
    _check_open(t, space.total_mass)
    order = np.lexsort((space.ids, vals))
    cum = np.cumsum(space.masses[order].astype(np.longdouble))
    k = int(np.searchsorted(cum, t, side="left"))
    k = min(k, len(space) - 1)
    take = order[: k + 1]
    return fsum(vals[take] * space.masses[take])


@dataclass(frozen=True)
class Prop34Check:
    """Two-sided bound of ``J`` by the nonincreasing rearrangement."""

    lhs: float       # ((theta-1) t / theta) * Wbar_star(t)
    J_left: float    # J(mu(X) - t/theta)
    J_right: float   # J(mu(X) - t)
    rhs: float       # (mu(X) - t) * Wbar_star(t)
    ok: bool


def check_prop34(field, space: WeightedSpace, t: float, theta: float,
                 slack: float = 1e-12) -> Prop34Check:
    """Check ``J(mu-t/theta) >= (theta-1)t/theta * Wbar(t)`` and ``J(mu-t) <= (mu-t) Wbar(t)``.

    ``slack`` is relative to the size of the compared quantities.
    """
    vals = field_values(field, space)
    total = space.total_mass
    _check_open(t, total)
    if not theta > 1:
        raise ValueError("theta must exceed 1")
    wbar = _wbar_star(DistributionProfile.of(vals, space), t)
    lhs = (theta - 1) * t / theta * wbar
    j_left = solve_J(vals, space, total - t / theta).value
    j_right = solve_J(vals, space, total - t).value
    rhs = (total - t) * wbar
    tol_l = slack * max(abs(lhs), abs(j_left), 1.0)
    tol_r = slack * max(abs(rhs), abs(j_right), 1.0)
    ok = (j_left >= lhs - tol_l) and (j_right <= rhs + tol_r)
    return Prop34Check(lhs, j_left, j_right, rhs, ok)
