"""Command-line experiment runner.

Every subcommand writes one deterministic JSON report (sorted keys, no
timestamps) and, with ``--format csv``, a CSV of its main table.  Without
``--out-dir`` the report goes to stdout.

A ``--config`` file holds ``key = value`` lines (``#`` starts a comment);
keys are the long option names of the subcommand with dashes or
underscores.  Command-line flags override the file.  Malformed files exit
with status 2 and name the offending line or key; a failed check exits
with status 1.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__

EXIT_FAILED_CHECK = 1
EXIT_BAD_CONFIG = 2


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- parsing


def parse_range(text: str) -> list[int]:
    """``"1..6"`` (inclusive), ``"1,3,5"`` or ``"4"``."""
    text = str(text).strip()
    if ".." in text:
        a, b = text.split("..", 1)
        out = list(range(int(a), int(b) + 1))
    else:
        out = [int(v) for v in text.split(",") if v.strip()]
    if not out:
        raise ValueError(f"empty range {text!r}")
    return out


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def parse_number(text: str):
    """Fraction for ``"1/9"``-style or decimal input."""
    return Fraction(str(text).strip())


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{no}: empty key")
        out[key.replace("-", "_")] = value
    return out


# ----------------------------------------------------------------- output


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(u) for u in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([json.dumps(_jsonable(r[k])) if isinstance(r[k], (list, dict, tuple)) else _jsonable(r[k])
                    for k in keys])
    return buf.getvalue()


def write_plot_data(path: Path, xs, ys) -> None:
    """Two-column whitespace-separated ``x y`` text file."""
    path.write_text("".join(f"{float(x)!r} {float(y)!r}\n" for x, y in zip(xs, ys)))


# ------------------------------------------------------------ golden files


def golden_compare(report: Any, golden: Any, rtol: float = 1e-9, atol: float = 1e-12,
                   path: str = "$") -> list[str]:
    """Differences between two JSON-like trees; numbers match when ``|a-b| <= atol + rtol |b|``."""
    diffs = []
    if isinstance(golden, dict):
        if not isinstance(report, dict):
            return [f"{path}: expected object"]
        for k in sorted(set(golden) | set(report)):
            if k not in report:
                diffs.append(f"{path}.{k}: missing")
            elif k not in golden:
                diffs.append(f"{path}.{k}: unexpected")
            else:
                diffs += golden_compare(report[k], golden[k], rtol, atol, f"{path}.{k}")
        return diffs
    if isinstance(golden, list):
        if not isinstance(report, list) or len(report) != len(golden):
            return [f"{path}: expected list of length {len(golden)}"]
        for i, (a, b) in enumerate(zip(report, golden)):
            diffs += golden_compare(a, b, rtol, atol, f"{path}[{i}]")
        return diffs
    if isinstance(golden, bool) != isinstance(report, bool):
        return [f"{path}: {report!r} != {golden!r}"]
    num = (int, float)
    if isinstance(golden, num) and not isinstance(golden, bool) and isinstance(report, num) \
            and not isinstance(report, bool):
        if not abs(report - golden) <= atol + rtol * abs(golden):
            diffs.append(f"{path}: {report!r} != {golden!r}")
        return diffs
    if report != golden:
        diffs.append(f"{path}: {report!r} != {golden!r}")
    return diffs


# ------------------------------------------------------------- subcommands


def _space_from_args(a, rng):
    from .measure import WeightedSpace
    if a.values:
        vals = parse_floats(a.values)
        masses = parse_floats(a.masses) if a.masses else [1.0] * len(vals)
    else:
        n = int(a.atoms)
        vals = rng.integers(0, 6, size=n).astype(float).tolist()
        masses = rng.uniform(0.1, 1.0, size=n).tolist()
    return WeightedSpace(masses, values=vals)


def cmd_rearrange(a, rng):
    from .rearrange import rearrangement_table
    space = _space_from_args(a, rng)
    ts = parse_floats(a.t) if a.t else [space.total_mass * q for q in (0.25, 0.5, 0.75, 1.0)]
    rows = rearrangement_table(None, space, ts)
    return {"space": space.to_record(), "rows": rows}, rows, True


def cmd_optcover(a, rng):
    from .optcover import MAX_BRUTE_FORCE_ATOMS, brute_force_I, greedy_I, solve_J
    space = _space_from_args(a, rng)
    ts = parse_floats(a.t) if a.t else [space.total_mass * q for q in (0.25, 0.5, 0.75)]
    rows, ok = [], True
    for t in ts:
        sol = solve_J(None, space, t)
        row = {"t": t, "J": sol.value, "W_star": sol.w_star, "kappa_minus": sol.kappa_minus,
               "greedy": greedy_I(None, space, t)}
        if len(space) <= MAX_BRUTE_FORCE_ATOMS:
            row["brute_force"] = brute_force_I(None, space, t)
            ok &= row["J"] <= row["brute_force"] * (1 + 1e-12) + 1e-12
        rows.append(row)
    return {"space": space.to_record(), "rows": rows}, rows, ok


def cmd_polyhedron(a, rng):
    from .geometry import Ball
    from .polyhedron import (DistortedMeasure, hl_dominance_check, lemma42_check,
                             max_delta_for_inscribed_cube, pushforward_check, random_boxes,
                             random_intervals)
    d = int(a.d)
    ball = Ball((0.0,) * d, float(a.radius))
    seed = int(a.seed)
    if a.check == "pushforward":
        res = parse_range(a.resolution) if a.resolution else [200] + [100] * (d - 1)
        ivs = random_intervals(int(a.samples), seed)
        base = pushforward_check(d, ball, res, ivs)
        fine = pushforward_check(d, ball, [2 * v for v in res], ivs)
        ratio = fine.sup_discrepancy / base.sup_discrepancy
        rows = [{"interval": iv, "base": float(x), "refined": float(y)}
                for iv, x, y in zip(ivs, base.discrepancy, fine.discrepancy)]
        ok = base.max_discrepancy <= 5e-3 and base.sup_discrepancy <= 5e-3 and 0.4 <= ratio <= 0.6
        return {"max_base": base.max_discrepancy, "max_refined": fine.max_discrepancy,
                "sup_base": base.sup_discrepancy, "sup_refined": fine.sup_discrepancy, "ratio": ratio,
                "resolution_per_radius": list(res), "tolerance": 5e-3}, rows, ok
    res = int(a.resolution) if a.resolution else (128 if a.check == "dominance" else 40)
    dm = DistortedMeasure(d, ball, res)
    if a.check == "dominance":
        rep = hl_dominance_check(dm, random_boxes(ball, int(a.samples), seed))
        rows = [{"region": i, "mu_s": float(m), "bound": float(b), "margin": float(g)}
                for i, (m, b, g) in enumerate(zip(rep.mu, rep.bound, rep.margin))]
        return {"worst_margin": rep.worst, "tolerance": 1e-6}, rows, rep.worst >= -1e-6
    delta = 0.9 * max_delta_for_inscribed_cube(d)
    rows, ok = [], True
    n_cells = int(dm.inside.sum())
    for i in range(int(a.samples)):
        w = rng.integers(0, 4, size=n_cells).astype(float)
        t = float(rng.uniform(0.05, 0.95))
        chk = lemma42_check(dm, w, t, delta)
        rows.append({"trial": i, "t": t, "lhs": chk.lhs, "rhs": chk.rhs, "ok": chk.ok})
        ok &= chk.ok
    return {"delta": delta, "kappa": rows and chk.kappa, "q": rows and chk.q}, rows, ok


def _system(name: str, theta):
    from .densesys import cantor_system, cylinder_extend, product_combine
    if name == "cantor":
        return cantor_system(theta)
    if name == "cylinder":
        return cylinder_extend(cantor_system(theta), (0,))
    if name == "product":
        return product_combine([cantor_system(theta), cantor_system(theta)])
    raise ConfigError(f"unknown system {name!r}")


def cmd_dense_verify(a, rng):
    from .densesys import verify_system
    sys_ = _system(a.system, parse_number(a.theta))
    if a.drop_level:
        sys_ = sys_.without_levels(parse_range(a.drop_level))
    rep = verify_system(sys_, int(a.samples), int(a.seed))
    rec = rep.to_record()
    rec["system"] = sys_.name
    expect_fail = bool(a.drop_level)
    ok = (rep.failed > 0) if expect_fail else (rep.failed == 0)
    return rec, [{"tested": rep.tested, "failed": rep.failed, "max_j": rep.max_j}], ok


def _potential(a):
    from .potentials import ValphaPotential
    table = None
    if a.N_rule == "custom":
        if not a.table:
            raise ConfigError("N-rule custom needs --table k:v,...")
        table = {int(k): float(v) for k, v in (p.split(":") for p in a.table.split(","))}
    return ValphaPotential.build(parse_number(a.alpha), a.N_rule, int(a.d), table)


def cmd_potential(a, rng):
    from .potentials import positivity_fraction_on_cell
    pot = _potential(a)
    rows = []
    if a.cell:
        l, j, n = a.cell
        l = tuple(int(v) for v in parse_floats(l))
        cf = positivity_fraction_on_cell(pot, l, int(j), int(n))
        rows.append({"l": list(l), "j": int(j), "n": int(n), "analytic": cf.analytic,
                     "measured": cf.measured, "exact": cf.exact})
        return {"cell": rows[0]}, rows, cf.measured == cf.analytic
    for x in a.eval or []:
        pt = tuple(parse_number(v) for v in x.split(","))
        rows.append({"x": [float(v) for v in pt], "value": pot(pt)})
    return {"values": rows}, rows, True


def cmd_conditions(a, rng):
    from . import conditions as C
    which = a.which
    if which == "ex54":
        rep = C.verify_example54(parse_number(a.alpha), a.N_rule, parse_range(a.n),
                                 parse_range(a.l), d=int(a.d))
        rows = [{"n": n, "ratio": r, "expected": e} for n, r, e in zip(rep.n, rep.ratios, rep.expected)]
        ok = rep.decreasing and rep.thm313_exact and rep.max_error <= 1e-12
        return rep.to_record(), rows, ok
    if which == "ex55":
        rep = C.verify_example55(parse_number(a.alpha), int(a.d), j_range=parse_range(a.n), rule=a.N_rule)
        rows = [{"j": j, "r": r, "positive_fraction": p, "gamma_hat": g, "value": v}
                for j, r, p, g, v in zip(rep.j, rep.r, rep.positive_fraction, rep.gamma_hat, rep.rearrangement)]
        return rep.to_record(), rows, rep.J is not None and rep.ratio_increasing
    pot = _potential(a)
    d = int(a.d)
    ks = parse_range(a.l)
    centers = [(k + 0.5,) + (0.5,) * (d - 1) for k in ks]
    r = float(a.radius)
    if which == "thm313":
        tr = C.cond_thm313(pot, C.power_gamma(pot.alpha), int(parse_range(a.n)[0]),
                           [(k,) + (0,) * (d - 1) for k in ks])
    elif which == "thm35":
        tr = C.cond_thm35(pot, centers, r, lambda s: 0.5, int(a.resolution or 12))
    elif which == "thm36":
        tr = C.cond_thm36(pot, centers, r, C.log_gamma_hat(d) if d > 2 else (lambda s: 0.5),
                          int(a.resolution or 12))
    elif which == "gmd":
        res = C.cond_gmd(pot, 1.0, float(a.c), r, centers, int(a.resolution or 12))
        rows = [{"index": list(g.center), "ratio_ball": g.ratio_ball, "ratio_cube": g.ratio_cube,
                 "verdict": g.ok} for g in res]
        return {"rows": rows}, rows, True
    else:
        raise ConfigError(f"unknown condition {which!r}")
    return tr.to_record(), tr.rows(), True


def cmd_spectral(a, rng):
    from .potentials import ValphaPotential
    from .spectral import bottom_trace, diagonal_centers
    d = int(a.d)
    if a.potential == "valpha":
        V = ValphaPotential.build(parse_number(a.alpha), a.N_rule, d)
    elif a.potential == "zero":
        V = 0.0
    elif a.potential == "quadratic":
        V = lambda p: (np.asarray(p) ** 2).sum(axis=1)
    else:
        raise ConfigError(f"unknown potential {a.potential!r}")
    ks = parse_range(a.windows)
    rows = bottom_trace(V, diagonal_centers(ks, d), float(a.side), int(a.grid), int(a.k),
                        a.sample, int(a.oversample))
    for r, k in zip(rows, ks):
        r["window"] = k
    return {"rows": rows, "side": float(a.side), "grid": int(a.grid)}, rows, True


def cmd_golden(a, rng):
    rep = json.loads(Path(a.report).read_text())
    if a.action == "write":
        Path(a.golden).write_text(dumps(rep))
        return {"written": a.golden}, [], True
    gold = json.loads(Path(a.golden).read_text())
    diffs = golden_compare(rep, gold, float(a.rtol), float(a.atol))
    return {"diffs": diffs, "rtol": float(a.rtol), "atol": float(a.atol)}, \
        [{"diff": d} for d in diffs], not diffs


COMMANDS = {
    "rearrange": cmd_rearrange,
    "optcover": cmd_optcover,
    "polyhedron": cmd_polyhedron,
    "dense-verify": cmd_dense_verify,
    "potential": cmd_potential,
    "conditions": cmd_conditions,
    "spectral": cmd_spectral,
    "golden": cmd_golden,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="accepted for interface compatibility; results do not depend on it")
    common.add_argument("--out-dir", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="specdisc", parents=[common],
                                description="Discreteness-condition experiments.")
    p.add_argument("--version", action="version", version=f"specdisc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **defaults):
        sp = sub.add_parser(name, parents=[common])
        sp.set_defaults(**defaults)
        return sp

    for name in ("rearrange", "optcover"):
        sp = add(name)
        sp.add_argument("--values")
        sp.add_argument("--masses")
        sp.add_argument("--atoms", default="8")
        sp.add_argument("--t")

    sp = add("polyhedron")
    sp.add_argument("--check", choices=["pushforward", "dominance", "lemma42"], default="dominance")
    sp.add_argument("--d", default="3")
    sp.add_argument("--radius", default="1.0")
    sp.add_argument("--resolution")
    sp.add_argument("--samples", default="100")

    sp = add("dense-verify")
    sp.add_argument("--system", choices=["cantor", "cylinder", "product"], default="cantor")
    sp.add_argument("--theta", default="1/9")
    sp.add_argument("--samples", default="10000")
    sp.add_argument("--drop-level")

    def potential_opts(sp):
        sp.add_argument("--alpha", default="1")
        sp.add_argument("--N-rule", dest="N_rule", choices=["log", "sqrt", "linf", "custom"], default="linf")
        sp.add_argument("--table")
        sp.add_argument("--d", default="3")

    sp = add("potential")
    potential_opts(sp)
    sp.add_argument("--eval", action="append", help="comma-separated coordinates, repeatable")
    sp.add_argument("--cell", nargs=3, metavar=("L", "J", "N"), help="l as comma list, level j, cell level n")
    sp.add_argument("--fraction", action="store_true")

    sp = add("conditions")
    potential_opts(sp)
    sp.add_argument("--which", choices=["thm35", "thm36", "thm313", "gmd", "ex54", "ex55"], default="ex54")
    sp.add_argument("--n", default="1..6")
    sp.add_argument("--l", default="3..10")
    sp.add_argument("--radius", default="0.3333333333333333")
    sp.add_argument("--resolution")
    sp.add_argument("--c", default="0.1")

    sp = add("spectral")
    sp.add_argument("--potential", choices=["valpha", "zero", "quadratic"], default="valpha")
    sp.add_argument("--alpha", default="1/10")
    sp.add_argument("--N-rule", dest="N_rule", choices=["log", "sqrt", "linf"], default="linf")
    sp.add_argument("--windows", default="2..8")
    sp.add_argument("--side", default="4")
    sp.add_argument("--grid", default="24")
    sp.add_argument("--k", default="1")
    sp.add_argument("--sample", choices=["node", "x1-average"], default="x1-average")
    sp.add_argument("--oversample", default="81")
    sp.add_argument("--d", default="3")

    sp = add("golden")
    sp.add_argument("action", choices=["compare", "write"])
    sp.add_argument("--report", required=True)
    sp.add_argument("--golden", required=True)
    sp.add_argument("--rtol", default="1e-9")
    sp.add_argument("--atol", default="1e-12")
    return p


def _apply_config(parser, ns, argv):
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    known = {a.dest for a in sub._actions}
    cfg = read_config(ns.config)
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        if key not in known or key in ("help", "config"):
            raise ConfigError(f"{ns.config}: unknown key {key!r} for '{ns.command}'")
        if key in given:
            continue
        action = next(a for a in sub._actions if a.dest == key)
        try:
            if action.type is not None:
                value = action.type(value)
            if action.choices is not None and value not in action.choices:
                raise ValueError(f"invalid choice {value!r}")
        except ValueError as exc:
            raise ConfigError(f"{ns.config}: key {key!r}: {exc}") from exc
        setattr(ns, key, value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if getattr(ns, "config", None):
            _apply_config(parser, ns, argv)
    except ConfigError as exc:
        print(f"specdisc: config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    seed = getattr(ns, "seed", 0)
    ns.seed = seed
    # accepted for interface compatibility; computation is single-threaded and the
    # report is independent of the thread count
    threads = getattr(ns, "threads", None)
    if threads is None:
        env = os.environ.get("SPECDISC_THREADS", "1") or "1"
        threads = int(env) if env.isdigit() else 0
    if threads < 1:
        print("specdisc: error: thread count must be positive", file=sys.stderr)
        return EXIT_BAD_CONFIG
    fmt = getattr(ns, "format", "json")
    rng = np.random.default_rng(seed)
    try:
        results, rows, ok = COMMANDS[ns.command](ns, rng)
    except (ConfigError, ValueError) as exc:
        print(f"specdisc: error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    inputs = {k: v for k, v in sorted(vars(ns).items()) if k not in ("out_dir", "threads")}
    report = {"tool": "specdisc", "version": __version__, "command": ns.command, "inputs": inputs,
              "results": results, "ok": bool(ok)}
    text = dumps(report)
    out_dir = getattr(ns, "out_dir", None)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{ns.command}.json").write_text(text)
        if fmt == "csv":
            (out / f"{ns.command}.csv").write_text(rows_to_csv(rows))
    else:
        sys.stdout.write(rows_to_csv(rows) if fmt == "csv" else text)
    return 0 if ok else EXIT_FAILED_CHECK


if __name__ == "__main__":
    sys.exit(main())
