"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 failed invariant
check.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dynamics import (EXTREMAL_KINDS, INITIALS, MODES, SimulationConfig,
                       empirical_rate, extremal_system, run_simulation,
                       run_stationary, verify_trajectory, write_trajectory_csv)
from .params import ParameterError, StarParams, TreeParams, star_params
from .spectral import (build_comparison_matrix, classical_bound, classical_gap,
                       rho_bound)
from .topology import (ShapeFormatError, TreeShape, nested_sets,
                       nested_sets_from_depths, read_shapes, sequence_depths)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK = 3
DOMINANCE_TOL = 5e-3


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(pairs, out=None):
    out = out or sys.stdout
    for k, v in pairs:
        print(f"{k}={_fmt(v)}", file=out)


def _params_from_args(args):
    """Return ``(raw_or_None, star)`` from mutually exclusive flag groups."""
    raw = [args.alpha, args.beta, args.gamma]
    star = [args.alpha_star, args.beta_star]
    has_raw = any(v is not None for v in raw)
    has_star = any(v is not None for v in star)
    if has_raw and has_star:
        raise UsageError("give either --alpha/--beta/--gamma or "
                         "--alpha-star/--beta-star, not both")
    if has_raw:
        if any(v is None for v in raw):
            raise UsageError("--alpha, --beta and --gamma must all be given")
        p = TreeParams(*raw)
        return p, star_params(p)
    if has_star:
        if any(v is None for v in star):
            raise UsageError("--alpha-star and --beta-star must both be given")
        return None, StarParams(*star)
    raise UsageError("no parameters given")


def _gap_ratio(T, rho, a):
    gap = classical_gap(T, a)
    return (1.0 - rho) / gap if gap > 0.0 else math.nan


def cmd_bound(args) -> int:
    raw, sp = _params_from_args(args)
    rep = rho_bound(args.depth, sp)
    a_cl = sp.alpha_star
    _emit([
        ("T_d", rep.depth),
        ("alpha_star", sp.alpha_star),
        ("beta_star", sp.beta_star),
        ("rho", rep.rho),
        ("method", rep.method),
        ("iterations", rep.iterations),
        ("residual", rep.residual),
        ("classical", classical_bound(rep.depth, a_cl)),
        ("gap_ratio", _gap_ratio(rep.depth, rep.rho, a_cl)),
    ])
    return EXIT_OK


def _simulation_structure(args):
    """Resolve the nested sets from ``--shapes`` or ``--levels``."""
    if args.shapes and args.levels:
        raise UsageError("give either --shapes or --levels, not both")
    if args.shapes:
        return nested_sets(sequence_depths(read_shapes(args.shapes)))
    if args.levels:
        try:
            levels = [int(tok) for tok in args.levels.replace(",", " ").split()]
            return nested_sets_from_depths(levels)
        except ValueError as exc:
            raise UsageError(f"--levels: {exc}") from None
    raise UsageError("simulate needs --shapes, --levels or --extremal")


def _extremal_setup(args):
    n = args.agents
    if n is None or n < 2:
        raise UsageError("--extremal needs --agents N with N >= 2")
    ns = nested_sets(sequence_depths([TreeShape.chain(n)]))
    kind = args.extremal
    if kind == "cycle":
        p = TreeParams(0.0, 0.0, 1.0)
    elif kind == "identity":
        p = TreeParams(1.0, 1.0, 0.0)
    else:
        b = 0.5 if args.beta is None else args.beta
        p = TreeParams(1.0, b, 1.0 - b)
    A = extremal_system(kind, n, p.beta)
    x0 = np.ones(n)
    x0[0] = 0.0
    return ns, p, A, x0


def cmd_simulate(args) -> int:
    if args.extremal:
        for flag in ("alpha", "gamma", "alpha_star", "beta_star"):
            if getattr(args, flag) is not None:
                raise UsageError(f"--{flag.replace('_', '-')} is fixed by --extremal")
        ns, p, A, x0 = _extremal_setup(args)
        traj = run_stationary(A, x0, ns, args.horizon)
    else:
        ns = _simulation_structure(args)
        p, _ = _params_from_args(args)
        if p is None:
            raise UsageError("simulate needs raw --alpha/--beta/--gamma")
        cfg = SimulationConfig(ns, p, args.horizon, seed=args.seed,
                               mode=args.mode, initial=args.initial)
        traj = run_simulation(cfg)
    sp = star_params(p)
    T = ns.depth
    bound = rho_bound(T, sp).rho
    burn_in = args.burn_in if args.burn_in is not None else args.horizon // 10
    rate = empirical_rate(traj, burn_in)
    failures = verify_trajectory(traj, build_comparison_matrix(T, sp))
    dominance = rate <= bound + DOMINANCE_TOL
    if args.out:
        write_trajectory_csv(args.out, traj)
    _emit([
        ("agents", ns.n),
        ("T_d", T),
        ("alpha_star", sp.alpha_star),
        ("beta_star", sp.beta_star),
        ("empirical_rate", rate),
        ("bound", bound),
        ("dominance", "PASS" if dominance else "FAIL"),
        ("comparison", "PASS" if not failures else f"FAIL at t={failures[:5]}"),
    ])
    return EXIT_OK if dominance and not failures else EXIT_CHECK


def _axis(grid, name):
    lo, hi, step = grid
    if not step > 0:
        raise UsageError(f"{name}: step must be positive")
    if not 0.0 <= lo <= hi <= 1.0:
        raise UsageError(f"{name}: need 0 <= min <= max <= 1")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def sweep_points(args):
    """Grid points ``(T, star)`` in output order; off-domain points skipped."""
    star_grid = args.alpha_star_grid is not None or args.beta_star_grid is not None
    raw_grid = any(g is not None for g in
                   (args.alpha_grid, args.beta_grid, args.gamma_grid))
    if star_grid and raw_grid:
        raise UsageError("mixing star and raw grids is not allowed")
    points = []
    if star_grid:
        if args.alpha_star_grid is None:
            raise UsageError("--alpha-star-grid is required")
        a_vals = _axis(args.alpha_star_grid, "--alpha-star-grid")
        b_vals = (_axis(args.beta_star_grid, "--beta-star-grid")
                  if args.beta_star_grid is not None else [0.0])
        for T in args.depth:
            for a in a_vals:
                for b in b_vals:
                    if a + b <= 1.0:
                        points.append((T, StarParams(a, b)))
    elif raw_grid:
        if any(g is None for g in (args.alpha_grid, args.beta_grid, args.gamma_grid)):
            raise UsageError("--alpha-grid, --beta-grid and --gamma-grid are all required")
        axes = [_axis(g, f) for g, f in ((args.alpha_grid, "--alpha-grid"),
                                          (args.beta_grid, "--beta-grid"),
                                          (args.gamma_grid, "--gamma-grid"))]
        for T in args.depth:
            for a in axes[0]:
                for b in axes[1]:
                    for g in axes[2]:
                        if b + g <= 1.0:
                            points.append((T, star_params(TreeParams(a, b, g))))
    else:
        raise UsageError("sweep needs --alpha-star-grid or the raw grids")
    if not points:
        raise UsageError("grid contains no valid points")
    return points


def _sweep_row(point):
    T, sp = point
    rho = rho_bound(T, sp).rho
    return (T, sp.alpha_star, sp.beta_star, rho,
            classical_bound(T, sp.alpha_star), _gap_ratio(T, rho, sp.alpha_star))


def sweep_rows(points, jobs=1):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, points))
    return [_sweep_row(p) for p in points]


def check_sweep_monotone(rows, tol=1e-10):
    """Rows where rho increases along the alpha_star or beta_star axis."""
    table = {(r[0], r[1], r[2]): r[3] for r in rows}
    alphas = sorted({r[1] for r in rows})
    betas = sorted({r[2] for r in rows})
    bad = []
    for (T, a, b), rho in table.items():
        ia, ib = alphas.index(a), betas.index(b)
        for key in ((T, alphas[ia + 1], b) if ia + 1 < len(alphas) else None,
                    (T, a, betas[ib + 1]) if ib + 1 < len(betas) else None):
            if key in table and table[key] > rho + tol:
                bad.append(((T, a, b), key))
    return bad


def cmd_sweep(args) -> int:
    points = sweep_points(args)
    rows = sweep_rows(points, args.jobs)
    header = ["T", "alpha_star", "beta_star", "rho", "classical", "gap_ratio"]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([r[0]] + [f"{v:.17g}" for v in r[1:]])
    finally:
        if fh is not sys.stdout:
            fh.close()
    bad = check_sweep_monotone(rows)
    if bad:
        print(f"monotonicity violated at {len(bad)} grid points, e.g. {bad[0]}",
              file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_depths(args) -> int:
    shapes = read_shapes(args.shapes)
    dp = sequence_depths(shapes)
    ns = nested_sets(dp)
    print("r=" + " ".join(map(str, dp.depths)))
    print(f"T_d={dp.depth}")
    for k, members in enumerate(ns.members):
        print(f"N_{k}=" + " ".join(map(str, sorted(members))))
    return EXIT_OK


def _grid(s):
    parts = s.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected MIN,MAX,STEP")
    return tuple(float(p) for p in parts)


def _add_param_flags(p):
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha-star", type=float)
    p.add_argument("--beta-star", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treebound",
        description="Contraction-rate bounds for consensus on time-varying trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="compute the contraction-rate bound")
    p.add_argument("--depth", type=int, required=True)
    _add_param_flags(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="simulate compliant dynamics")
    p.add_argument("--shapes")
    p.add_argument("--levels", help="level of each agent, e.g. '0 1 2 2'")
    p.add_argument("--extremal", choices=EXTREMAL_KINDS)
    p.add_argument("--agents", type=int)
    _add_param_flags(p)
    p.add_argument("--horizon", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="tight")
    p.add_argument("--initial", choices=INITIALS, default="worst-case-split")
    p.add_argument("--burn-in", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate the bound over a grid")
    p.add_argument("--depth", type=int, nargs="+", required=True)
    p.add_argument("--alpha-star-grid", type=_grid, metavar="MIN,MAX,STEP")
    p.add_argument("--beta-star-grid", type=_grid, metavar="MIN,MAX,STEP")
    p.add_argument("--alpha-grid", type=_grid, metavar="MIN,MAX,STEP")
    p.add_argument("--beta-grid", type=_grid, metavar="MIN,MAX,STEP")
    p.add_argument("--gamma-grid", type=_grid, metavar="MIN,MAX,STEP")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("depths", help="depth profile of a shapes file")
    p.add_argument("--shapes", required=True)
    p.set_defaults(func=cmd_depths)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParameterError, ShapeFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
