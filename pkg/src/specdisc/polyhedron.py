"""Distorted-capacity measures on a ball.

The slice map ``s(x) = m_{d,r}{z in B_r(y) : z_1 <= x_1}`` pushes the normalised
Lebesgue measure of the ball forward to the uniform law on ``[0, 1]``.  With
``f(t) = t^{(d-2)/d}`` the measure ``mu_s = cap(B_r) f'(s) dm_{d,r}`` is
dominated setwise by ``cap(B_r) f(m_{d,r})`` and has total mass ``cap(B_r)``.

On a grid the map is realised slab by slab (cells sharing an ``x_1`` index):
slab ``k`` owns the mass interval ``[S_{k-1}, S_k]`` of the normalised grid
measure and receives ``cap * (f(S_k) - f(S_{k-1}))``, split over its cells in
proportion to their volume.  This layer-cake form keeps the total mass exact,
avoids evaluating ``f'`` at the singular point ``s = 0``, and makes the
dominance ``mu_s(A) <= cap f(m(A))`` hold exactly on the grid (concavity of
``f``), with equality on unions of leading slabs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc

from .geometry import Ball, Box, cap_ball, unit_ball_volume
from .measure import WeightedSpace, fsum
from .rearrange import DistributionProfile, _wbar_star

MAX_DEFAULT_DIM = 5


def _check_d(d, allow_high=False):
    if int(d) != d or d < 3:
        raise ValueError("dimension must be an integer >= 3")
    if d > MAX_DEFAULT_DIM and not allow_high:
        raise ValueError(f"d={d} disabled by default (grid cost); pass allow_high=True")


def f_distortion(d: int, t):
    return np.asarray(t, dtype=float) ** ((d - 2) / d)


def f_prime(d: int, t):
    with np.errstate(divide="ignore"):
        return (d - 2) / d * np.asarray(t, dtype=float) ** (-2 / d)


def slice_fraction(d: int, c):
    """Fraction of the unit ball with first coordinate ``<= c``.

    Regularised incomplete beta ``I_{(1+c)/2}((d+1)/2, (d+1)/2)``, the closed
    form of ``int_{-1}^c (1-u^2)^{(d-1)/2} du`` normalised.
    """
    c = np.asarray(c, dtype=float)
    if np.any(np.abs(c) > 1):
        raise ValueError("slice offset must lie in [-1, 1]")
    a = (d + 1) / 2
    out = betainc(a, a, (1 + c) / 2)
    return float(out) if out.ndim == 0 else out


def slice_offset(d: int, fraction: float, xtol: float = 1e-13) -> float:
    """Inverse of :func:`slice_fraction` (bracketed root find)."""
    if not (0 <= fraction <= 1):
        raise ValueError("fraction must lie in [0, 1]")
    if fraction in (0, 1):
        return 2 * fraction - 1
    return brentq(lambda c: slice_fraction(d, c) - fraction, -1.0, 1.0, xtol=xtol, rtol=1e-15)


def s_map(d: int, ball: Ball, x) -> np.ndarray | float:
    """Measure-preserving map of ``B_r(y)`` onto ``[0, 1]`` through the first coordinate."""
    x = np.asarray(x, dtype=float)
    c = (x[..., 0] - ball.center[0]) / ball.radius
    return slice_fraction(d, np.clip(c, -1.0, 1.0))


def z_weight(d: int, ball: Ball, x):
    """``1 / f'(s(x)) = d/(d-2) s(x)^{2/d}``; multiplies ``V`` into ``Z_mu``."""
    s = np.asarray(s_map(d, ball, x), dtype=float)
    out = d / (d - 2) * s ** (2 / d)
    return float(out) if out.ndim == 0 else out


def sigma_delta(d: int, delta: float) -> float:
    """Offset ``sigma`` from the left pole (unit radius) where ``1/f'(s)`` reaches ``delta``.

    ``1/f'(s) >= delta`` iff ``s >= ((d-2) delta / d)^{d/2}``; the return value is
    the first coordinate of that level in the chart of ``B_1(e_1)``, in ``[0, 2]``.
    """
    _check_d(d, allow_high=True)
    target = ((d - 2) * delta / d) ** (d / 2)
    if not (0 < target < 1):
        raise ValueError("delta gives a slice level outside (0, 1)")
    return 1.0 + slice_offset(d, target)


def max_delta_for_inscribed_cube(d: int) -> float:
    """Largest ``delta`` with the inscribed cube inside ``Pi_delta``: ``sigma(delta) <= 1 - d^{-1/2}``."""
    s = slice_fraction(d, -1 / math.sqrt(d))
    return d / (d - 2) * s ** (2 / d)


# ------------------------------------------------------------ grid measure


class DistortedMeasure:
    """Grid realisation of ``mu_s`` on ``B_r(y)``.

    Cells of a uniform grid on ``[y - r, y + r]^d`` whose center lies in the
    open ball carry the normalised Lebesgue mass ``p`` and the distorted mass
    ``mu``; both are stored as dense arrays (zero outside the ball).
    """

    def __init__(self, d: int, ball: Ball, resolution: int | Sequence[int], allow_high: bool = False):
        _check_d(d, allow_high)
        if ball.dim != d:
            raise ValueError("ball dimension mismatch")
        res = tuple(int(v) for v in np.broadcast_to(np.asarray(resolution), (d,)))
        if min(res) < 2:
            raise ValueError("resolution must be >= 2")
        self.d = d
        self.ball = ball
        self.shape = res
        r = ball.radius
        self.origin = np.array(ball.center, dtype=float) - r
        self.h = 2 * r / np.array(res, dtype=float)
        self.cell_volume = float(np.prod(self.h))
        self.cap = cap_ball(d, r)

        dist2 = np.zeros(res)
        for ax in range(d):
            c = self.origin[ax] + (np.arange(res[ax]) + 0.5) * self.h[ax] - ball.center[ax]
            shape = [1] * d
            shape[ax] = res[ax]
            dist2 = dist2 + (c ** 2).reshape(shape)
        self.inside = dist2 < r * r
        counts = self.inside.reshape(res[0], -1).sum(axis=1)
        total_cells = int(counts.sum())
        self.total_volume = total_cells * self.cell_volume
        # slab masses of the normalised grid measure
        self.slab_mass = counts / total_cells
        S = np.concatenate([[0.0], np.cumsum(counts) / total_cells])
        S[-1] = 1.0
        self.slab_S = S
        df = np.diff(f_distortion(d, S))
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(counts > 0, df / np.where(counts > 0, self.slab_mass, 1.0), 0.0)
        self.slab_density = slope            # average of f'(s) over the slab
        with np.errstate(divide="ignore"):
            self.slab_weight = np.where(slope > 0, 1.0 / slope, 0.0)
        cell_p = 1.0 / total_cells
        self.p = np.where(self.inside, cell_p, 0.0)
        self.mu = self.cap * self.p * slope.reshape((-1,) + (1,) * (d - 1))
        self.mu = np.where(self.inside, self.mu, 0.0)
        self._sat = {}

    # -- cell views ---------------------------------------------------

    @property
    def total_mu(self) -> float:
        return fsum(self.mu)

    def centers(self) -> np.ndarray:
        """Centers of the in-ball cells, ``(n, d)``, C order."""
        idx = np.argwhere(self.inside)
        return self.origin + (idx + 0.5) * self.h

    def cell_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.argwhere(self.inside)
        lo = self.origin + idx * self.h
        return lo, lo + self.h

    def weights(self) -> np.ndarray:
        """``1/f'`` (slab average) of the in-ball cells; ``Z = W * weights``."""
        idx = np.argwhere(self.inside)
        return self.slab_weight[idx[:, 0]]

    def space(self, kind: str = "mu") -> WeightedSpace:
        """In-ball cells as a weighted space (``kind`` is ``"mu"``, ``"m"`` or ``"lebesgue"``)."""
        lo, hi = self.cell_bounds()
        if kind == "mu":
            masses = self.mu[self.inside]
        elif kind == "m":
            masses = self.p[self.inside]
        elif kind == "lebesgue":
            masses = np.full(lo.shape[0], self.cell_volume)
        else:
            raise ValueError(f"unknown measure kind {kind!r}")
        return WeightedSpace(masses, None, None, lo, hi)

    # -- set masses ---------------------------------------------------

    def _table(self, kind):
        if kind not in self._sat:
            arr = self.mu if kind == "mu" else self.p
            sat = arr.astype(np.longdouble)
            for ax in range(self.d):
                sat = np.cumsum(sat, axis=ax)
            self._sat[kind] = np.pad(sat, [(1, 0)] * self.d)
        return self._sat[kind]

    def _index_range(self, box: Box):
        lo = np.array([float(v) for v in box.lo])
        hi = np.array([float(v) for v in box.hi])
        # cells whose center lies in the closed box
        i0 = np.ceil((lo - self.origin) / self.h - 0.5).astype(int)
        i1 = np.floor((hi - self.origin) / self.h - 0.5).astype(int)
        i0 = np.clip(i0, 0, np.array(self.shape))
        i1 = np.clip(i1 + 1, 0, np.array(self.shape))
        return i0, np.maximum(i1, i0)

    def box_mass(self, box: Box, kind: str = "mu") -> float:
        """Mass of the in-ball cells whose center lies in ``box`` (summed-area table)."""
        sat = self._table(kind)
        i0, i1 = self._index_range(box)
        total = np.longdouble(0)
        for corner in np.ndindex(*(2,) * self.d):
            idx = tuple(int(i1[a]) if c else int(i0[a]) for a, c in enumerate(corner))
            sign = (-1) ** (self.d - sum(corner))
            total += sign * sat[idx]
        return float(total)

    def mask_mass(self, mask: np.ndarray, kind: str = "mu") -> float:
        arr = self.mu if kind == "mu" else self.p
        return fsum(arr[mask & self.inside])

    def sublevel_mask(self, k: int) -> np.ndarray:
        """Cells of the first ``k`` slabs: the grid version of ``{s <= S_k}``."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[:k] = True
        return mask & self.inside


def mu_s_mass(dm: DistortedMeasure, region) -> float:
    """``mu_s(A)`` for a :class:`Box` or a boolean cell mask; ``None`` means the whole ball."""
    if region is None:
        return dm.total_mu
    if isinstance(region, Box):
        return dm.box_mass(region, "mu")
    return dm.mask_mass(np.asarray(region, dtype=bool), "mu")


@dataclass(frozen=True)
class DominanceReport:
    mu: np.ndarray        # mu_s(A)
    bound: np.ndarray     # cap * f(m(A))
    margin: np.ndarray    # bound - mu

    @property
    def worst(self) -> float:
        return float(self.margin.min()) if self.margin.size else math.inf


def hl_dominance_check(dm: DistortedMeasure, regions: Sequence) -> DominanceReport:
    """Margins ``cap f(m(A)) - mu_s(A)`` for boxes or masks ``A``."""
    mus, bounds = [], []
    for reg in regions:
        if isinstance(reg, Box):
            mu = dm.box_mass(reg, "mu")
            m = dm.box_mass(reg, "m")
        else:
            mu = dm.mask_mass(reg, "mu")
            m = dm.mask_mass(reg, "m")
        mus.append(mu)
        bounds.append(dm.cap * float(f_distortion(dm.d, min(max(m, 0.0), 1.0))))
    mus, bounds = np.array(mus), np.array(bounds)
    return DominanceReport(mus, bounds, bounds - mus)


def random_boxes(ball: Ball, count: int, seed: int = 0) -> list[Box]:
    """Seeded random boxes in the bounding cube of ``ball``."""
    rng = np.random.default_rng(seed)
    d, r = ball.dim, ball.radius
    c = np.array(ball.center)
    a = rng.uniform(-r, r, size=(count, d))
    b = rng.uniform(-r, r, size=(count, d))
    lo, hi = np.minimum(a, b) + c, np.maximum(a, b) + c
    hi = np.maximum(hi, lo + 1e-9)
    return [Box(tuple(l), tuple(h)) for l, h in zip(lo, hi)]


# ---------------------------------------------------------- pushforward


@dataclass(frozen=True)
class PushforwardReport:
    resolution: tuple
    intervals: list
    discrepancy: np.ndarray
    sup_discrepancy: float   # over all intervals of [0, 1]

    @property
    def max_discrepancy(self) -> float:
        return float(self.discrepancy.max())


def pushforward_check(d: int, ball: Ball, resolution: Sequence[int], intervals) -> PushforwardReport:
    """Compare ``|B|`` with the grid mass of ``s^{-1}(B)`` for intervals ``B`` in ``[0, 1]``.

    ``resolution`` gives cells per radius along each axis (the grid spans
    ``2 * resolution`` cells across the ball), the first entry along ``x_1``.  Cells
    count when their center lies in the open ball; ``s`` is evaluated at the
    center.  The transverse count per slab is exact (sorted squared radii).
    """
    _check_d(d, allow_high=True)
    res = [int(v) for v in np.broadcast_to(np.asarray(resolution), (d,))]
    r = ball.radius
    h = r / np.array(res, dtype=float)
    x1 = -r + (np.arange(2 * res[0]) + 0.5) * h[0]
    trans = [-r + (np.arange(2 * n) + 0.5) * hk for n, hk in zip(res[1:], h[1:])]
    rho2 = np.zeros(())
    for ax, t in enumerate(trans):
        shape = [1] * len(trans)
        shape[ax] = t.size
        rho2 = rho2 + (t ** 2).reshape(shape)
    rho2 = np.sort(rho2.ravel())
    counts = np.searchsorted(rho2, r * r - x1 ** 2, side="left")
    mass = counts / counts.sum()
    s = slice_fraction(d, x1 / r)
    order = np.argsort(s)
    s_sorted, cum = s[order], np.concatenate([[0.0], np.cumsum(mass[order])])
    disc = []
    for a, b in intervals:
        ia = np.searchsorted(s_sorted, a, side="left")
        ib = np.searchsorted(s_sorted, b, side="right")
        disc.append(abs((b - a) - (cum[ib] - cum[ia])))
    # sup over intervals of |(b - a) - mass| = max - min of the CDF gap, one-sided limits included
    gap = np.concatenate([cum[:-1] - s_sorted, cum[1:] - s_sorted, [0.0]])
    sup = float(gap.max() - gap.min())
    return PushforwardReport(tuple(res), [tuple(iv) for iv in intervals], np.array(disc), sup)


def random_intervals(count: int, seed: int = 0) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    ab = np.sort(rng.uniform(0, 1, size=(count, 2)), axis=1)
    return [(float(a), float(b)) for a, b in ab]


# ----------------------------------------------- sub-cube comparison constants


def subcube_box(d: int, ball: Ball, placement: float = 0.0) -> Box:
    """Sub-cube of side ``r/sqrt(d)`` inside the inscribed cube of ``ball``.

    ``placement`` is the left edge of its first-coordinate range relative to
    the center, in units of ``r``; admissible values are ``[-1/sqrt(d), 0]``.
    The transverse range is centered.
    """
    s = 1 / math.sqrt(d)
    if not (-s - 1e-15 <= placement <= 1e-15):
        raise ValueError("placement must lie in [-1/sqrt(d), 0]")
    r = ball.radius
    side = r * s
    lo = [ball.center[0] + placement * r] + [c - side / 2 for c in ball.center[1:]]
    return Box(tuple(lo), tuple(v + side for v in lo))


def q_ratio(d: int, placement: float = 0.0) -> float:
    """``mu_s(sub-cube) / mu_s(ball)`` by one-dimensional quadrature.

    Depends only on ``d`` and the relative placement, not on the radius or the
    center of the ball.
    """
    from scipy.integrate import quad

    s = 1 / math.sqrt(d)
    integrand = lambda c: float(f_prime(d, slice_fraction(d, c)))
    val, _ = quad(integrand, placement, placement + s, epsabs=1e-14, epsrel=1e-13)
    return s ** (d - 1) / unit_ball_volume(d) * val


@dataclass(frozen=True)
class KappaConstants:
    delta: float
    q: float
    kappa: float
    sigma: float


def kappa_const(d: int, delta: float, placement: float = 0.0) -> KappaConstants:
    """``kappa = delta q (d-2)/d`` with the continuum ``q`` of :func:`q_ratio`."""
    sig = sigma_delta(d, delta)
    if sig > 1 - 1 / math.sqrt(d) + 1e-12:
        raise ValueError("delta too large: inscribed cube not inside Pi_delta")
    q = q_ratio(d, placement)
    return KappaConstants(delta, q, delta * q * (d - 2) / d, sig)


@dataclass(frozen=True)
class Lemma42Check:
    lhs: float
    rhs: float
    kappa: float
    q: float
    ok: bool


def lemma42_check(dm: DistortedMeasure, W, t: float, delta: float, placement: float = 0.0,
                  tol: float = 1e-9) -> Lemma42Check:
    """Compare ``Zbar*_{mu_s}(kappa t mu_s(B))`` with ``delta Wbar*(t mes(Q), Q)``.

    ``W`` is a callable on cell centers or an array over the in-ball cells;
    ``Q`` is the sub-cube of :func:`subcube_box`; ``q`` and ``kappa`` are taken
    from the same grid.
    """
    if not (0 < t < 1):
        raise ValueError("t must lie in (0, 1)")
    d = dm.d
    if sigma_delta(d, delta) > 1 - 1 / math.sqrt(d) + 1e-12:
        raise ValueError("delta too large: inscribed cube not inside Pi_delta")
    centers = dm.centers()
    w = np.asarray(W(centers) if callable(W) else W, dtype=float).ravel()
    if w.size != centers.shape[0] or np.any(w < 0):
        raise ValueError("W must be nonnegative with one value per in-ball cell")
    qbox = subcube_box(d, dm.ball, placement)
    lo = np.array([float(v) for v in qbox.lo])
    hi = np.array([float(v) for v in qbox.hi])
    in_q = np.all((centers >= lo) & (centers <= hi), axis=1)
    if not np.any(in_q):
        raise ValueError("grid too coarse for the sub-cube")
    weights = dm.weights()
    if np.any(weights[in_q] < delta):
        raise ValueError("sub-cube cells leave Pi_delta on this grid")
    mu = dm.mu[dm.inside]
    total_mu = fsum(mu)
    q = fsum(mu[in_q]) / total_mu
    kappa = delta * q * (d - 2) / d
    z = w * weights
    lhs = _wbar_star(DistributionProfile.of(z, WeightedSpace(mu)), kappa * t * total_mu)
    vol = np.full(int(in_q.sum()), dm.cell_volume)
    leb = WeightedSpace(vol)
    rhs = delta * _wbar_star(DistributionProfile.of(w[in_q], leb), t * leb.total_mass)
    return Lemma42Check(lhs, rhs, kappa, q, lhs >= rhs - tol * max(1.0, abs(rhs)))
