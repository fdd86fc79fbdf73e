"""Command-line interface: instance generation, solves, campaigns, sweeps."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import baselines, bench, dynamics
from .energy import Thermo
from .errors import BinallocError
from .graphs import named_topology
from .instances import load_instance, random_instance, save_instance

SOLVE_METHODS = ("binnn-c", "binnn-d", "hnn", "greedy", "brute", "round")


def _pair(text):
    lo, hi = (float(v) for v in text.split(","))
    return lo, hi


def _int_list(text):
    return [int(v) for v in text.split(",")]


def _add_solver_flags(sub):
    sub.add_argument("--temp", type=float, default=1.0, help="activation temperature")
    sub.add_argument("--tau", type=float, default=0.1, help="barrier time constant")
    sub.add_argument("--floor", type=float, default=0.1, help="Hessian truncation floor")
    sub.add_argument("--alpha", type=float, default=1.0, help="auxiliary flow gain")
    sub.add_argument("--h", type=float, default=1e-2, help="integration step")
    sub.add_argument("--t-max", type=float, default=1000.0)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--eps-init", type=float, default=0.05)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--anneal", action="store_true", help="enable the learning schedule")
    sub.add_argument("--beta", type=float, default=1.4)
    sub.add_argument("--steps", type=int, default=10)
    sub.add_argument("--td", type=float, default=1.0, help="simulated time per round")
    sub.add_argument("--knob", choices=("tau-up", "T-down"), default="tau-up")


def _solver_config(args):
    anneal = None
    if getattr(args, "anneal", False):
        anneal = dynamics.AnnealSchedule(
            beta=args.beta, t_d=args.td, steps=args.steps, knob=args.knob
        )
    return dynamics.SolverConfig(
        thermo=Thermo(temp=args.temp, time_const=args.tau, floor=args.floor),
        alpha=args.alpha,
        step=args.h,
        eps_init=args.eps_init,
        tol_x=args.tol,
        tol_y=args.tol,
        t_max=args.t_max,
        anneal=anneal,
        seed=args.seed,
    )


def _cmd_gen(args):
    instance = random_instance(
        args.n,
        args.seed,
        p_range=args.p_range,
        exponent_range=args.e_range,
        p_ref=args.p_ref,
        gamma=args.gamma,
    )
    edges = None
    if args.topology:
        edges = named_topology(
            args.topology, args.n, seed=args.seed, extra_edge_fraction=args.extra_edges
        ).edges
    save_instance(instance, args.out, edges=edges)
    norm = float(np.linalg.norm(instance.output))
    print(f"wrote {args.out}: n={instance.n} |p|={norm:.6g} p_ref={instance.target:.6g}")
    return 0


def _graph_for(args, n, edges):
    if edges is not None:
        from .graphs import build_graph

        return build_graph(n, edges)
    return named_topology(
        args.topology or "random", n, seed=args.graph_seed, extra_edge_fraction=args.extra_edges
    )


def _cmd_solve(args):
    instance, edges = load_instance(args.instance)
    method = args.method
    cfg = _solver_config(args)
    if method in ("greedy", "brute", "round"):
        if method == "greedy":
            sol = baselines.greedy(instance)
        elif method == "brute":
            sol = baselines.brute_force(instance)
        else:
            frac = np.loadtxt(args.frac_point, delimiter=",").ravel()
            sol = baselines.round_relaxed(frac, instance)
        bits = sol.bits(instance.n)
        print(f"method: {method}")
        print(f"bits: {''.join(map(str, bits))}")
        print(f"cost: {sol.cost:.12g}")
        return 0
    graph = _graph_for(args, instance.n, edges) if method == "binnn-d" else None
    solver = dynamics.anneal if args.anneal else dynamics.run
    result = solver(method, instance, graph, cfg)
    diag = dynamics.terminal_diagnostics(result, instance, graph=graph, tol_x=cfg.tol_x)
    print(f"method: {method}{'-da' if args.anneal else ''}")
    print(f"bits: {''.join(map(str, result.bits))}")
    print(f"cost: {result.cost:.12g}")
    print(f"iterations: {result.iterations}")
    print(f"wall_time: {result.wall_time:.6g}")
    print(f"converged: {result.converged}")
    print(f"grad_inf: {diag.grad_inf:.6g}")
    print(f"min_hessian_eig: {diag.min_hessian_eig:.6g}")
    print(f"local_min_certified: {diag.local_min_certified}")
    if args.traj_out:
        dynamics.write_trajectory_csv(result, args.traj_out)
        print(f"trajectory: {args.traj_out}")
    return 0


def _cmd_bench(args):
    methods = tuple(args.methods.split(",")) if args.methods else bench.DEFAULT_METHODS
    if args.with_brute and "brute" not in methods:
        methods = methods + ("brute",)
    config = bench.CampaignConfig(
        n=args.n,
        trials=args.trials,
        seed=args.seed,
        methods=methods,
        p_ref=args.p_ref,
        gamma=args.gamma,
    )
    records = bench.run_campaign(config, jobs=args.jobs)
    scores = bench.q_metric(records)
    os.makedirs(args.out_dir, exist_ok=True)
    bench.write_campaign_csv(records, os.path.join(args.out_dir, "campaign.csv"))
    bench.write_q_csv(scores, os.path.join(args.out_dir, "q.csv"))
    width = max(len(m) for m in scores)
    for method, q in sorted(scores.items(), key=lambda kv: -kv[1]):
        print(f"{method:<{width}}  Q={q:.4f}")
    return 0


def _cmd_sweep(args):
    methods = tuple(args.methods.split(","))
    rows = bench.runtime_sweep(
        args.grid, methods, per_n_trials=args.per_n_trials, seed=args.seed
    )
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "scaling.csv")
    bench.write_sweep_csv(rows, path)
    for row in rows:
        print(f"n={row['n']} {row['method']}: {row['median_seconds']:.6g}s")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="binalloc",
        description="Binary resource allocation via Newton-like Hopfield flows.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a random instance file")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--p-range", type=_pair, default=(1.0, 50.0))
    gen.add_argument("--e-range", type=_pair, default=(2.0, 3.0))
    gen.add_argument("--p-ref", type=float, default=1500.0)
    gen.add_argument("--gamma", type=float, default=1.0)
    gen.add_argument("--topology", choices=("ring", "path", "complete", "random"))
    gen.add_argument("--extra-edges", type=float, default=0.2)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    solve = subs.add_parser("solve", help="solve one instance file")
    solve.add_argument("instance")
    solve.add_argument("--method", choices=SOLVE_METHODS, required=True)
    solve.add_argument("--frac-point", help="CSV fractional point for --method round")
    solve.add_argument("--topology", choices=("ring", "path", "complete", "random"))
    solve.add_argument("--graph-seed", type=int, default=0)
    solve.add_argument("--extra-edges", type=float, default=0.2)
    solve.add_argument("--traj-out", help="write the trajectory CSV here")
    _add_solver_flags(solve)
    solve.set_defaults(func=_cmd_solve)

    cb = subs.add_parser("bench", help="run a benchmark campaign")
    cb.add_argument("--n", type=int, default=50)
    cb.add_argument("--trials", type=int, default=100)
    cb.add_argument("--seed", type=int, default=0)
    cb.add_argument("--methods", help="comma-separated method list")
    cb.add_argument("--with-brute", action="store_true")
    cb.add_argument("--p-ref", type=float, default=1500.0)
    cb.add_argument("--gamma", type=float, default=1.0)
    cb.add_argument("--jobs", type=int, default=1)
    cb.add_argument("--out-dir", default=".")
    cb.set_defaults(func=_cmd_bench)

    sw = subs.add_parser("sweep", help="measure runtime scaling over problem sizes")
    sw.add_argument("--grid", type=_int_list, required=True)
    sw.add_argument("--methods", required=True)
    sw.add_argument("--per-n-trials", type=int, default=3)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out-dir", default=".")
    sw.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.n < 1:
        parser.error("--n must be >= 1")
    if args.command == "solve" and args.method == "round" and not args.frac_point:
        parser.error("--method round requires --frac-point")
    try:
        return args.func(args)
    except (BinallocError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
