"""Discreteness-condition functionals evaluated as finite traces.

Every condition has the form "some local functional of ``V`` tends to
infinity as the window moves off to infinity".  A finite computation can only
tabulate the functional along a sequence of windows; the verdict attached to
a :class:`ConditionTrace` is a growth flag inside the printed window, never a
proof.

Windows for the ball-type conditions are the cubes inscribed in
``B_r(y)`` (side ``2r/sqrt(d)``, centered at ``y``); level-type conditions use
the m-adic cells of unit cubes.  Potentials are either callables on
``(n, d)`` points (sampled at grid midpoints) or a
:class:`~specdisc.potentials.ValphaPotential`, which has exact cell
distributions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .densesys import DenseSystem, cantor_system, cylinder_extend
from .geometry import Ball, Box, ball_volume, cap_ball, cube, inscribed_cube, xi_subset
from .measure import WeightedSpace, build_grid
from .optcover import check_prop34, solve_J
from .polyhedron import DistortedMeasure
from .potentials import (ValphaPotential, as_fraction, beta_level, positivity_measure_exact)
from .rearrange import DistributionProfile, _wbar_star

MAX_CELLS_PER_CUBE = 200_000


@dataclass
class ConditionTrace:
    condition: str
    params: dict
    index: list = field(default_factory=list)
    values: list = field(default_factory=list)
    verdict: str = "undecided"
    window: tuple = ()

    def add(self, idx, value):
        self.index.append(idx)
        self.values.append(value)

    def finish(self, growth: float = 2.0):
        self.verdict = divergence_verdict(self.values, growth)
        if self.index:
            self.window = (self.index[0], self.index[-1])
        return self

    def to_record(self) -> dict:
        return {"condition": self.condition, "params": self.params,
                "index": [_plain(i) for i in self.index], "values": [_plain(v) for v in self.values],
                "verdict": self.verdict, "window": [_plain(i) for i in self.window]}

    def rows(self) -> list[dict]:
        return [{"index": _plain(i), "value": _plain(v), "verdict": self.verdict}
                for i, v in zip(self.index, self.values)]


def _plain(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (tuple, list)):
        return [_plain(u) for u in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def divergence_verdict(values: Sequence, growth: float = 2.0) -> str:
    """``"growing"`` when nondecreasing with final/initial above ``growth`` (or leaving 0); else ``"bounded"``."""
    vals = [float(v) for v in values]
    if len(vals) < 2:
        return "undecided"
    nondecreasing = all(b >= a for a, b in zip(vals, vals[1:]))
    if not nondecreasing:
        return "bounded"
    first, last = vals[0], vals[-1]
    if first == 0:
        return "growing" if last > 0 else "bounded"
    return "growing" if last >= growth * first else "bounded"


# ---------------------------------------------------------- field binding


def _sampler(V) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(V, ValphaPotential):
        return V.evaluate
    if callable(V):
        return lambda pts: np.asarray(V(pts), dtype=float).reshape(-1)
    c = float(V)
    return lambda pts: np.full(pts.shape[0], c)


def window_space(V, box: Box, resolution) -> WeightedSpace:
    """Lebesgue grid on ``box`` with ``V`` sampled at cell midpoints."""
    sp = build_grid(box, resolution)
    vals = _sampler(V)(sp.centers)
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError("potential must be nonnegative and finite")
    return sp.with_values(vals)


def inscribed_window(center: Sequence[float], r: float) -> Box:
    return inscribed_cube(tuple(float(c) for c in center), r)


def _domain_volume(d, r):
    return (2 * r / math.sqrt(d)) ** d


# ------------------------------------------------------------- conditions


def cond_thm35(V, centers: Sequence, r: float, gamma_tilde: Callable[[float], float],
               resolution=12) -> ConditionTrace:
    """``J_V(sigma(r), y, r)`` with ``sigma(r) = (1 - gamma_tilde(r)) mes(G_r(0))``."""
    g = float(gamma_tilde(r))
    if not (0 < g < 1):
        raise ValueError("gamma_tilde(r) must lie in (0, 1)")
    d = len(centers[0])
    t = (1 - g) * _domain_volume(d, r)
    tr = ConditionTrace("thm35", {"r": r, "gamma_tilde": g, "t": t, "resolution": resolution})
    for y in centers:
        sp = window_space(V, inscribed_window(y, r), resolution)
        tr.add(tuple(y), solve_J(None, sp, min(t, sp.total_mass * (1 - 1e-15))).value)
    return tr.finish()


def cond_thm36(V, centers: Sequence, r: float, gamma_hat: Callable[[float], float],
               resolution=12, sandwich_theta: Optional[float] = 2.0) -> ConditionTrace:
    """``Vbar*(delta_hat(r), y, r)`` with ``delta_hat(r) = gamma_hat(r) mes(G_r(0))``.

    With ``sandwich_theta`` set, every window also checks the two-sided bound
    of ``J`` by ``Vbar*`` at ``t = delta_hat(r)``; failures are listed in
    ``params["sandwich_failures"]``.
    """
    g = float(gamma_hat(r))
    if not (0 < g < 1):
        raise ValueError("gamma_hat(r) must lie in (0, 1)")
    d = len(centers[0])
    t = g * _domain_volume(d, r)
    tr = ConditionTrace("thm36", {"r": r, "gamma_hat": g, "t": t, "resolution": resolution})
    bad = []
    for y in centers:
        sp = window_space(V, inscribed_window(y, r), resolution)
        tt = min(t, sp.total_mass)
        tr.add(tuple(y), _wbar_star(DistributionProfile.of(None, sp), tt))
        if sandwich_theta is not None and tt < sp.total_mass:
            chk = check_prop34(None, sp, tt, sandwich_theta, slack=1e-12)
            if not chk.ok:
                bad.append(tuple(y))
    tr.params["sandwich_failures"] = bad
    return tr.finish()


def cond_mu_s(V, centers: Sequence, r: float, gamma: Callable[[float], float],
              resolution=24) -> ConditionTrace:
    """``Zbar*_{mu_s}(gamma(r) mu_s(B_r(y)))`` for the distorted measure witness on balls."""
    g = float(gamma(r))
    if not (0 < g < 1):
        raise ValueError("gamma(r) must lie in (0, 1)")
    d = len(centers[0])
    tr = ConditionTrace("mu_s", {"r": r, "gamma": g, "resolution": resolution})
    for y in centers:
        dm = DistortedMeasure(d, Ball(tuple(float(c) for c in y), r), resolution)
        w = _sampler(V)(dm.centers())
        z = w * dm.weights()
        mu = dm.mu[dm.inside]
        sp = WeightedSpace(mu)
        tr.add(tuple(y), _wbar_star(DistributionProfile.of(z, sp), g * sp.total_mass))
    return tr.finish()


@dataclass(frozen=True)
class GmdResult:
    center: tuple
    threshold: float
    level_mass: float
    ratio_ball: float
    ratio_cube: float
    ok: bool


def cond_gmd(V, delta: float, c: float, r: float, centers: Sequence, resolution=12) -> list[GmdResult]:
    """Mass of ``{V >= delta * mean_Q V}`` on ``Q_r(y)`` against ``c mes(B_r)``."""
    out = []
    for y in centers:
        y = tuple(float(v) for v in y)
        d = len(y)
        box = cube(y, r)
        sp = window_space(V, box, resolution)
        thr = delta * float(np.dot(sp.values, sp.masses)) / sp.total_mass
        lam = float(sp.masses[sp.values >= thr].sum())
        rb = lam / ball_volume(d, r)
        out.append(GmdResult(y, thr, lam, rb, lam / r ** d, rb >= c))
    return out


def gmd_ratio_exact(pot: ValphaPotential, box: Box, delta=1) -> Fraction:
    """``mes{V >= delta mean V} / mes(box)`` from the exact distribution of ``V`` on ``box``."""
    dist = pot.distribution_on_box(box)
    vol = sum(dist.values(), Fraction(0))
    integral = sum((as_fraction(v) * m for v, m in dist.items()), Fraction(0))
    thr = as_fraction(delta) * integral / vol
    return sum((m for v, m in dist.items() if as_fraction(v) >= thr), Fraction(0)) / vol


# --------------------------------------------------- level-type condition


def power_gamma(alpha) -> Callable:
    """``gamma(r) = r^alpha``, returning the shared canonical value at ``r = 3^-n``."""
    a = as_fraction(alpha)

    def gamma(r):
        if isinstance(r, Fraction) and r.numerator == 1:
            n = round(math.log(r.denominator, 3))
            if 3 ** n == r.denominator:
                return beta_level(a, n)
        return Fraction(float(r) ** float(a))
    return gamma


def cantor_cylinder(l: Sequence[int]) -> DenseSystem:
    """``D_n x [0,1]^(d-1)`` translated to ``Q_1(l)``."""
    base = cantor_system(home=int(l[0]))
    return cylinder_extend(base, tuple(l[1:])) if len(l) > 1 else base


def wbar_from_distribution(dist: dict, t) -> Fraction | float:
    """``Vbar*(t)`` from an exact ``{value: mass}`` distribution."""
    items = sorted(((as_fraction(v), m) for v, m in dist.items() if m > 0), reverse=True)
    acc = Fraction(0)
    for v, m in items:
        acc += m
        if acc >= t:
            return v if v > 0 else Fraction(0)
    return Fraction(0)


def cell_value(V, cell_box: Box, u, resolution=6):
    """``Vbar*(u mes(Q), Q)`` on one cell; exact for :class:`ValphaPotential`."""
    if isinstance(V, ValphaPotential):
        t = as_fraction(u) * cell_box.volume
        return wbar_from_distribution(V.distribution_on_box(cell_box), t)
    sp = window_space(V, Box(tuple(float(v) for v in cell_box.lo), tuple(float(v) for v in cell_box.hi)),
                      resolution)
    return _wbar_star(DistributionProfile.of(None, sp), min(float(u) * sp.total_mass, sp.total_mass))


def xi_cells(system: DenseSystem, l, n: int, m: int = 3) -> dict[int, list]:
    """``Xi_n(l, j)`` for ``j = 1..n``: level-``n`` cells inside ``D_j(l)``."""
    return {j: xi_subset(l, n, system.level(j), m) for j in range(1, n + 1)}


def cond_thm313(V, gamma: Callable, n: int, l_list: Sequence[Sequence[int]], m: int = 3,
                system_for: Callable = cantor_cylinder, resolution=6) -> ConditionTrace:
    """``min over xi in the union of Xi_n(l, j) of Vbar*(gamma(m^-n), xi, n)`` per ``l``."""
    u = gamma(Fraction(1, m ** n))
    tr = ConditionTrace("thm313", {"n": n, "m": m, "gamma": float(u)})
    for l in l_list:
        l = tuple(int(v) for v in l)
        xi = xi_cells(system_for(l), l, n, m)
        empty = [j for j, cells in xi.items() if not cells]
        if empty:
            raise ValueError(f"Xi_n(l, j) empty for l={l}, j={empty}")
        cells = {c.num: c for cells in xi.values() for c in cells}
        if len(cells) > MAX_CELLS_PER_CUBE:
            raise ValueError("too many cells")
        best = None
        seen = {}
        for c in cells.values():
            box = c.box
            # the potential families used here depend on the first coordinate only
            key = (box.lo[0], box.hi[0]) if isinstance(V, ValphaPotential) else c.num
            if key not in seen:
                seen[key] = cell_value(V, box, u, resolution)
            v = seen[key]
            best = v if best is None or v < best else best
        tr.add(l, best)
    return tr.finish()


def xi_nonempty_check(system_for: Callable, n_range: Sequence[int], l_list, m: int = 3) -> dict:
    """``{(l, n, j): Xi_n(l, j) nonempty}`` for ``j <= n``."""
    table = {}
    for l in l_list:
        l = tuple(l)
        sys = system_for(l)
        for n in n_range:
            for j, cells in xi_cells(sys, l, n, m).items():
                table[(l, n, j)] = bool(cells)
    return table


# ---------------------------------------------------------- the two examples


@dataclass
class Example54Report:
    alpha: Fraction
    thm313: ConditionTrace
    thm313_expected: list
    thm313_exact: bool
    n: list
    ratios: list
    expected: list
    max_error: float
    exact: bool
    decreasing: bool

    def to_record(self) -> dict:
        return {"alpha": str(self.alpha), "thm313": self.thm313.to_record(),
                "thm313_expected": self.thm313_expected, "thm313_exact": self.thm313_exact,
                "n": self.n, "ratios": [float(r) for r in self.ratios],
                "expected": [float(e) for e in self.expected], "max_error": self.max_error,
                "exact": self.exact, "decreasing": self.decreasing}


def verify_example54(alpha, rule: str = "linf", n_range=range(1, 7), l_range=range(3, 11),
                     n313: int = 2, d: int = 3, delta=1) -> Example54Report:
    """Level-type condition holds (value ``N(l)``) while the mean-level ratio decays like ``3^(-alpha n)``."""
    pot = ValphaPotential.build(alpha, rule, d)
    ls = [(k,) + (0,) * (d - 1) for k in l_range]
    tr = cond_thm313(pot, power_gamma(pot.alpha), n313, ls)
    expected313 = [pot.amplitude(l) for l in ls]
    exact313 = all(float(v) == e for v, e in zip(tr.values, expected313))
    ratios, expected = [], []
    for n in n_range:
        side = Fraction(1, 3 ** n)
        lo = (Fraction(n) + side,) + (Fraction(0),) * (d - 1)
        box = cube(lo, side)
        ratios.append(gmd_ratio_exact(pot, box, delta))
        expected.append(beta_level(pot.alpha, n))
    errs = [abs(float(r) - 3.0 ** (-float(pot.alpha) * n)) for r, n in zip(ratios, n_range)]
    exact = all(r == e for r, e in zip(ratios, expected))
    dec = all(b < a for a, b in zip(ratios, ratios[1:]))
    return Example54Report(pot.alpha, tr, expected313, exact313, list(n_range), ratios, expected,
                           max(errs), exact, dec)


def log_gamma_hat(d: int = 3) -> Callable[[float], float]:
    """``r^(2(d-2)/d) ln(1/r)``."""
    e = 2 * (d - 2) / d
    return lambda r: float(r) ** e * math.log(1 / float(r))


@dataclass
class Example55Report:
    alpha: Fraction
    j: list
    r: list
    positive_fraction: list
    gamma_hat: list
    rearrangement: list
    J: Optional[int]
    J_sufficient_bound: Optional[int]
    divergence_ratio: list
    ratio_increasing: bool

    def to_record(self) -> dict:
        return {"alpha": str(self.alpha), "j": self.j, "r": [float(v) for v in self.r],
                "positive_fraction": [float(v) for v in self.positive_fraction],
                "gamma_hat": self.gamma_hat, "rearrangement": [float(v) for v in self.rearrangement],
                "J": self.J, "J_sufficient_bound": self.J_sufficient_bound,
                "divergence_ratio": self.divergence_ratio, "ratio_increasing": self.ratio_increasing}


def verify_example55(alpha=1, d: int = 3, gamma_hat: Optional[Callable] = None, j_range=range(1, 13),
                     rule: str = "linf") -> Example55Report:
    """Ball-type rearrangement vanishes on cubes ``Q_{r_j}(y_j)`` placed in leftmost level-``j`` intervals.

    ``r_j = 2 3^-(j+1)``, ``y_j = (3^-j + j, 0, ..)``, ``l = (j, 0, ..)``; the
    cube spans two periods of the oscillation so its positive fraction is
    exactly ``3^(-alpha j)``.
    """
    a = as_fraction(alpha)
    lo_a = Fraction(2 * (d - 2), d)
    if not (lo_a < a < 2):
        raise ValueError(f"alpha must lie in ({float(lo_a)}, 2)")
    pot = ValphaPotential.build(a, rule, d)
    gh = gamma_hat or log_gamma_hat(d)
    js, rs, fr, gs, vals, div = [], [], [], [], [], []
    sufficient_ok = []
    for j in j_range:
        r = 2 * Fraction(1, 3 ** (j + 1))
        lo = (Fraction(j) + Fraction(1, 3 ** j),) + (Fraction(0),) * (d - 1)
        box = cube(lo, r)
        dist = pot.distribution_on_box(box)
        amp = pot.amplitude((j,) + (0,) * (d - 1))
        pos = dist[amp] / box.volume
        g = float(gh(r))
        t = Fraction(g) * box.volume
        js.append(j)
        rs.append(r)
        fr.append(pos)
        gs.append(g)
        vals.append(wbar_from_distribution(dist, t))
        psi = float(r) ** float(a)
        div.append(g / psi)
        # crude a-priori index: gamma_hat dominates 2 3^d r^alpha
        sufficient_ok.append(2 * 3 ** d * psi < g)
    J = _first_tail(js, [v == 0 for v in vals])
    J_sufficient = _first_tail(js, sufficient_ok)
    inc = all(b > a_ for a_, b in zip(div, div[1:]))
    return Example55Report(a, js, rs, fr, gs, vals, J, J_sufficient, div, inc)


def _first_tail(js, flags) -> Optional[int]:
    """Smallest ``j`` from which every flag in the range is true."""
    J = None
    for j, f in zip(reversed(js), reversed(flags)):
        if not f:
            break
        J = j
    return J
