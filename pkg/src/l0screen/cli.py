"""Command-line interface.

Four subcommands: ``gen`` writes a synthetic dataset, ``screen`` runs
the relax/round/fix pipeline on CSV data, ``solve`` runs an exact
solver, and ``bench`` sweeps a parameter grid and emits one CSV row per
(instance, method).  Reports go to stdout as JSON (CSV for bench).
Exit codes: 0 on success, 1 on runtime failures such as unreadable or
malformed data, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .datagen import GENERATOR_NAME, SyntheticSpec, gamma_zero, generate, load_csv, save_dataset
from .exact import BnBConfig, branch_and_bound, brute_force
from .heuristics import round_card, round_reg
from .problem import FixState, Instance, ProblemSpec, Variant
from .relax import SolverConfig, solve_cc, solve_cr
from .report import BENCH_COLUMNS, validate_run_report
from .screening import screen_card, screen_reg


def _versions():
    return {"package": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _emit(report: dict):
    validate_run_report(report)
    print(json.dumps(report, indent=2))


def _parse_index_list(text: str, parser, flag: str):
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        parser.error(f"{flag} expects a comma-separated list of integers")


def _parse_float_list(text: str, parser, flag: str):
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        parser.error(f"{flag} expects a comma-separated list of numbers")


def _spec_from_args(args, parser) -> ProblemSpec:
    if args.gamma is None or args.gamma <= 0:
        parser.error("--gamma must be a positive number")
    if args.variant == "reg":
        if args.mu is None:
            parser.error("--mu is required for --variant reg")
        if args.mu <= 0:
            parser.error("--mu must be positive")
        return ProblemSpec.reg(args.gamma, args.mu)
    if args.k is None:
        parser.error("--k is required for --variant card")
    if args.k < 1:
        parser.error("--k must be >= 1")
    return ProblemSpec.card(args.gamma, args.k)


def cmd_gen(args, parser) -> int:
    if args.k_true > args.n:
        parser.error("--k-true cannot exceed --n")
    if not (0.0 <= args.rho < 1.0):
        parser.error("--rho must lie in [0, 1)")
    if args.snr <= 0:
        parser.error("--snr must be positive")
    spec = SyntheticSpec(n=args.n, m=args.m, k_true=args.k_true,
                         rho=args.rho, snr=args.snr, seed=args.seed)
    inst, support = generate(spec)
    meta = {
        "n": spec.n, "m": spec.m, "k_true": spec.k_true, "rho": spec.rho,
        "snr": spec.snr, "seed": spec.seed, "generator_name": GENERATOR_NAME,
        "true_support": list(support),
    }
    save_dataset(args.out, inst, meta)
    _emit({
        "command": "gen",
        "args": {"n": args.n, "m": args.m, "k_true": args.k_true, "rho": args.rho,
                 "snr": args.snr, "out": args.out},
        "instance": {"m": inst.m, "n": inst.n, "source": "synthetic"},
        "timings_ms": {},
        "out": {"dir": args.out, "files": ["A.csv", "y.csv", "meta.json"]},
        "versions": _versions(),
        "seed": spec.seed,
    })
    return 0


def _screen_pipeline(inst: Instance, spec: ProblemSpec, tol: float, zeta_bar):
    """Relax, round, screen.  Returns (report, relax, incumbent, timings)."""
    cfg = SolverConfig(tol=tol)
    timings = {}
    t = time.perf_counter()
    if spec.variant is Variant.REG:
        rel = solve_cr(inst, spec.gamma, spec.mu, cfg)
    else:
        rel = solve_cc(inst, spec.gamma, spec.k, cfg)
    timings["relax"] = (time.perf_counter() - t) * 1e3

    inc = None
    t = time.perf_counter()
    if zeta_bar is None:
        if spec.variant is Variant.REG:
            inc = round_reg(inst, spec.gamma, spec.mu, rel)
        else:
            inc = round_card(inst, spec.gamma, spec.k, rel)
        zeta_bar = inc.objective
    timings["heuristic"] = (time.perf_counter() - t) * 1e3

    t = time.perf_counter()
    if spec.variant is Variant.REG:
        rep = screen_reg(inst, spec.gamma, spec.mu, rel, zeta_bar)
    else:
        rep = screen_card(inst, spec.gamma, spec.k, rel, zeta_bar)
    timings["screen"] = (time.perf_counter() - t) * 1e3
    return rep, rel, inc, timings


_FIX_NAMES = {int(FixState.FREE): "free", int(FixState.ZERO): "zero", int(FixState.ONE): "one"}


def _write_reduced(out_dir: str, inst: Instance, spec: ProblemSpec, rep) -> dict:
    """Write the screened-down problem: kept columns plus forced-in markers.

    Fixed-out columns are dropped; fixed-in columns stay in the matrix
    (their coefficients are still optimized) and are listed as forced,
    so the reduced files solve to the same optimum with the same gamma
    and mu/k.
    """
    keep = np.flatnonzero(rep.fixes != FixState.ZERO)
    forced_new = [int(i) for i in np.flatnonzero(rep.fixes[keep] == FixState.ONE)]
    meta = {
        "variant": spec.variant.value,
        "gamma": spec.gamma,
        "mu": spec.mu,
        "k": spec.k,
        "n_original": inst.n,
        "kept_columns": [int(i) for i in keep],
        "forced_in": forced_new,
    }
    if keep.size == 0:
        os.makedirs(out_dir, exist_ok=True)
        meta["trivial"] = True
        with open(os.path.join(out_dir, "meta_reduced.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
        return {"dir": out_dir, "files": ["meta_reduced.json"], **meta}
    sub = Instance(inst.a[:, keep], inst.y)
    save_dataset(out_dir, sub, {})
    with open(os.path.join(out_dir, "meta_reduced.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    return {"dir": out_dir, "files": ["A.csv", "y.csv", "meta_reduced.json"], **meta}


def cmd_screen(args, parser) -> int:
    spec = _spec_from_args(args, parser)
    inst = load_csv(args.a, args.y)
    if spec.variant is Variant.CARD and spec.k > inst.n:
        parser.error(f"--k exceeds the number of columns ({inst.n})")
    rep, rel, inc, timings = _screen_pipeline(inst, spec, args.tol, args.zeta_bar)
    out = None
    if args.out_reduced:
        out = _write_reduced(args.out_reduced, inst, spec, rep)
    report = {
        "command": "screen",
        "args": {"a": args.a, "y": args.y, "variant": args.variant, "gamma": args.gamma},
        "instance": {"m": inst.m, "n": inst.n, "source": args.a},
        "spec": _spec_block(spec),
        "timings_ms": {k: round(v, 3) for k, v in timings.items()},
        "screen": {
            "n_zero": rep.n_zero, "n_one": rep.n_one, "n_free": rep.n_free,
            "lower_bound": rep.lower_bound, "zeta_bar": rep.upper_bound,
            "fixes": [_FIX_NAMES[int(f)] for f in rep.fixes],
        },
        "versions": _versions(),
        "seed": None,
    }
    if out is not None:
        report["out"] = out
    _emit(report)
    return 0


def _spec_block(spec: ProblemSpec) -> dict:
    block = {"variant": spec.variant.value, "gamma": spec.gamma}
    if spec.mu is not None:
        block["mu"] = spec.mu
    if spec.k is not None:
        block["k"] = spec.k
    return block


def cmd_solve(args, parser) -> int:
    spec = _spec_from_args(args, parser)
    inst = load_csv(args.a, args.y)
    if spec.variant is Variant.CARD and spec.k > inst.n:
        parser.error(f"--k exceeds the number of columns ({inst.n})")
    fixed = None
    if args.forced_in:
        idx = _parse_index_list(args.forced_in, parser, "--forced-in")
        if idx and (min(idx) < 0 or max(idx) >= inst.n):
            parser.error(f"--forced-in indices must lie in [0, {inst.n})")
        fixed = np.full(inst.n, FixState.FREE, dtype=np.int8)
        fixed[idx] = FixState.ONE

    t = time.perf_counter()
    if args.method == "brute":
        inc, _ = brute_force(inst, spec, fixed=fixed)
        n_free = inst.n if fixed is None else int(np.count_nonzero(fixed == FixState.FREE))
        if spec.variant is Variant.REG:
            nodes = 2 ** n_free
        else:
            room = spec.k - (0 if fixed is None else int(np.count_nonzero(fixed == FixState.ONE)))
            nodes = sum(math.comb(n_free, j) for j in range(min(room, n_free) + 1))
        solve_block = {
            "objective": inc.objective, "support": list(inc.support), "nodes": int(nodes),
            "wall_time_s": time.perf_counter() - t, "optimal": True, "root_fixed": 0,
        }
    else:
        cfg = BnBConfig(
            time_limit_s=args.time_limit, node_limit=args.node_limit,
            screen_at_root=args.screen == "on", screen_per_node=False,
        )
        stats = branch_and_bound(inst, spec, cfg, fixed=fixed)
        inc = stats.best
        solve_block = {
            "objective": inc.objective, "support": list(inc.support),
            "nodes": stats.nodes_explored, "wall_time_s": stats.wall_time_s,
            "optimal": stats.optimal, "root_fixed": stats.root_fixed,
        }
    _emit({
        "command": "solve",
        "args": {"a": args.a, "y": args.y, "variant": args.variant,
                 "method": args.method, "screen": args.screen},
        "instance": {"m": inst.m, "n": inst.n, "source": args.a},
        "spec": _spec_block(spec),
        "timings_ms": {"solve": round((time.perf_counter() - t) * 1e3, 3)},
        "solve": solve_block,
        "versions": _versions(),
        "seed": None,
    })
    return 0


def _bench_methods_row(inst, k, gamma, method, time_limit, node_limit, tol):
    """One bench measurement; returns (fixed_count, nodes, time_s, optimal)."""
    t0 = time.perf_counter()
    if method == "screen":
        cfg = SolverConfig(tol=tol)
        rel = solve_cc(inst, gamma, k, cfg)
        inc = round_card(inst, gamma, k, rel)
        rep = screen_card(inst, gamma, k, rel, inc.objective)
        return rep.n_zero + rep.n_one, 0, time.perf_counter() - t0, rep.n_free == 0
    cfg = BnBConfig(time_limit_s=time_limit, node_limit=node_limit,
                    screen_at_root=method == "bnb_screen")
    stats = branch_and_bound(inst, ProblemSpec.card(gamma, k), cfg)
    fixed = stats.root_fixed if method == "bnb_screen" else 0
    return fixed, stats.nodes_explored, stats.wall_time_s, stats.optimal


def cmd_bench(args, parser) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in {"screen", "bnb", "bnb_screen"}:
            parser.error(f"unknown method {m!r}")
    k_grid = _parse_index_list(args.k_grid, parser, "--k-grid")
    gamma_exps = _parse_float_list(args.gamma_exps, parser, "--gamma-exps")
    if not k_grid or not gamma_exps:
        parser.error("--k-grid and --gamma-exps must be non-empty")

    tasks = []  # (instance_id, loader, k, gexp, rho_str, snr_str)
    if args.suite == "synthetic":
        if args.n is None or args.m is None:
            parser.error("--suite synthetic needs --n and --m")
        snr_grid = _parse_float_list(args.snr_grid, parser, "--snr-grid")
        if args.seeds < 1:
            parser.error("--seeds must be >= 1")
        for k in k_grid:
            if k > args.n:
                parser.error(f"--k-grid value {k} exceeds --n")
            for gexp in gamma_exps:
                for snr in snr_grid:
                    for rep in range(args.seeds):
                        seed = args.seed_base + rep
                        iid = f"syn-n{args.n}-m{args.m}-k{k}-g{gexp:g}-r{args.rho:g}-s{snr:g}-seed{seed}"
                        sspec = SyntheticSpec(n=args.n, m=args.m, k_true=k,
                                              rho=args.rho, snr=snr, seed=seed)
                        tasks.append((iid, sspec, k, gexp, f"{args.rho:g}", f"{snr:g}"))
    else:
        if not args.a or not args.y:
            parser.error("--suite files needs --a and --y")
        base = os.path.basename(args.a)
        for k in k_grid:
            for gexp in gamma_exps:
                tasks.append((f"file-{base}-k{k}-g{gexp:g}", None, k, gexp, "", ""))

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    file_inst = None
    for iid, sspec, k, gexp, rho_str, snr_str in tasks:
        if sspec is not None:
            inst, _ = generate(sspec)
        else:
            if file_inst is None:
                file_inst = load_csv(args.a, args.y)
            inst = file_inst
        if k > inst.n:
            writer.writerow([iid, "-", k, gexp, rho_str, snr_str, 0, 0.0, 0, 0.0,
                             "false", "error:k exceeds columns"])
            continue
        gamma = (2.0 ** gexp) * gamma_zero(inst, k)
        for method in methods:
            try:
                fixed, nodes, secs, optimal = _bench_methods_row(
                    inst, k, gamma, method, args.time_limit, args.node_limit, args.tol
                )
                writer.writerow([
                    iid, method, k, gexp, rho_str, snr_str, fixed,
                    round(100.0 * fixed / inst.n, 3), nodes, round(secs, 4),
                    "true" if optimal else "false", "ok",
                ])
            except Exception as exc:  # keep the sweep alive; record the failure
                writer.writerow([iid, method, k, gexp, rho_str, snr_str,
                                 0, 0.0, 0, 0.0, "false", f"error:{type(exc).__name__}"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l0screen",
                                     description="Safe screening for best-subset regression")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset (A.csv, y.csv, meta.json)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k-true", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--snr", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    for name in ("screen", "solve"):
        p = sub.add_parser(name)
        p.add_argument("--variant", choices=["reg", "card"], required=True)
        p.add_argument("--gamma", type=float, required=True)
        p.add_argument("--mu", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--a", required=True, help="matrix CSV, one row per line")
        p.add_argument("--y", required=True, help="response CSV, one value per line")
        p.add_argument("--tol", type=float, default=1e-8)
    sub.choices["screen"].add_argument("--zeta-bar", type=float, default=None,
                                       help="use this upper bound instead of the rounding heuristic")
    sub.choices["screen"].add_argument("--out-reduced", default=None,
                                       help="directory for the screened-down problem files")
    sub.choices["solve"].add_argument("--method", choices=["bnb", "brute"], default="bnb")
    sub.choices["solve"].add_argument("--screen", choices=["on", "off"], default="on")
    sub.choices["solve"].add_argument("--time-limit", type=float, default=3600.0)
    sub.choices["solve"].add_argument("--node-limit", type=int, default=1_000_000)
    sub.choices["solve"].add_argument("--forced-in", default=None,
                                      help="comma-separated 0-based columns fixed into the support")

    p = sub.add_parser("bench", help="grid sweep; one CSV row per instance and method")
    p.add_argument("--suite", choices=["synthetic", "files"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--k-grid", default="10", help="comma-separated k values")
    p.add_argument("--gamma-exps", default="0", help="comma-separated exponents i for gamma = 2^i gamma0")
    p.add_argument("--snr-grid", default="6", help="comma-separated SNR values (synthetic)")
    p.add_argument("--seeds", type=int, default=1, help="instances per cell (synthetic)")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--a")
    p.add_argument("--y")
    p.add_argument("--methods", default="screen,bnb_screen")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--node-limit", type=int, default=1_000_000)
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"gen": cmd_gen, "screen": cmd_screen, "solve": cmd_solve, "bench": cmd_bench}
    try:
        return handlers[args.command](args, parser)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
