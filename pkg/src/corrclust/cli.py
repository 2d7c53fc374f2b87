"""Command-line surface: instance suites, references, correlations, runs, benchmarks."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench
from .anneal import RunRecord, acceptance_statistics, run_ca, run_sa
from .cluster import random_cluster_policy
from .correlations import (
    cc_correlations,
    mc_correlations,
    mh_sample,
    read_correlations,
    write_correlations,
)
from .errors import CorrclustError
from .instance import generate_regular, read_instance, write_instance
from .qaoa import qaoa_correlations, qaoa_optimize, qaoa_p1_correlations, qaoa_prepare, write_params
from .sdp import sdp_correlations, sdp_solve


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--threads", type=int, default=1, help="worker pool size")
    sub.add_argument("--out-dir", default=".", help="output directory")


def _ensure_out(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def cmd_gen(args) -> int:
    out = _ensure_out(args)
    weights = tuple(float(w) for w in args.weights.split(","))
    for k in range(args.count):
        inst = generate_regular(
            args.n, args.d, weight_set=weights, seed=bench._cell_seed(args.seed, 90, k)
        )
        gid = f"d{args.d}_n{args.n}_g{k:03d}"
        path = os.path.join(out, f"{gid}.txt")
        write_instance(inst, path)
        print(path)
    return 0


def cmd_exact(args) -> int:
    out = _ensure_out(args)
    store = bench.ReferenceStore(os.path.join(out, "references.json"))
    for path in args.instances:
        gid = os.path.splitext(os.path.basename(path))[0]
        inst = read_instance(path)
        rec = bench.register_reference(store, gid, inst, method=args.method, seed=args.seed)
        print(f"{gid} energy={rec.energy!r} certified={int(rec.certified)}")
    if args.refresh:
        changed = bench.refresh_is_optimal(args.refresh, store)
        print(f"refreshed {args.refresh}: {changed} rows changed")
    return 0


def cmd_corr(args) -> int:
    out = _ensure_out(args)
    for idx, path in enumerate(args.instances):
        gid = os.path.splitext(os.path.basename(path))[0]
        inst = read_instance(path)
        seed = bench._cell_seed(args.seed, 50, idx, 0)
        if args.source == "cc":
            mats = [("cc", cc_correlations(inst))]
        elif args.source == "mc":
            mats = []
            for b in args.param:
                ss = mh_sample(
                    inst,
                    b,
                    burn_in=args.burn_in,
                    thin=args.thin,
                    n_samples=args.samples,
                    seed=seed,
                )
                mats.append((f"mc_b{b:g}", mc_correlations(ss)))
        elif args.source == "sdp":
            mats = [("sdp", sdp_correlations(sdp_solve(inst, seed=seed)))]
        elif args.source == "qaoa-sim":
            mats = []
            for p in args.param:
                params, _ = qaoa_optimize(inst, int(p), restarts=args.restarts, seed=seed)
                if args.save_params:
                    write_params(params, os.path.join(out, f"{gid}_p{int(p)}.angles"))
                mats.append((f"qaoa_p{int(p)}", qaoa_correlations(qaoa_prepare(inst, params))))
        elif args.source == "qaoa-p1":
            b1, g1 = (float(t) for t in args.angles.split(","))
            mats = [("qaoa_p1", qaoa_p1_correlations(inst, b1, g1))]
        else:
            raise CorrclustError(f"unknown source {args.source}")
        for tag, z in mats:
            path_out = os.path.join(out, f"{gid}_{tag}.corr")
            write_correlations(z, path_out)
            print(path_out)
    return 0


def cmd_run(args) -> int:
    inst = read_instance(args.instance)
    m = args.budget * inst.n
    if args.method == "SA":
        rec = run_sa(inst, beta_f=args.beta_f, m=m, seed=args.seed)
        label = "SA"
    else:
        z = read_correlations(args.corr) if args.corr else cc_correlations(inst)
        policy = random_cluster_policy(args.p_const) if args.p_const is not None else None
        rec = run_ca(
            inst,
            None if args.p_const is not None else z,
            beta_f=args.beta_f,
            m=m,
            lambda_scale=args.lambda_scale,
            policy=policy,
            seed=args.seed,
        )
        label = f"CA({'random' if args.p_const is not None else z.label()})"
    print(
        f"{label}: e_best={rec.e_best!r} proposals={rec.evaluations}"
        f" final_beta={rec.final_beta:.4f} wall={rec.wall_time:.3f}s"
    )
    if args.events:
        _write_events(rec, args)
    return 0


def _write_events(rec: RunRecord, args) -> None:
    gid = os.path.splitext(os.path.basename(args.instance))[0]
    source = "-" if args.method == "SA" else ("random" if args.p_const is not None else "file")
    with open(args.events, "w") as fh:
        fh.write(bench.ACCEPT_HEADER + "\n")
        for b, s, d, a in zip(
            rec.event_beta, rec.event_size, rec.event_delta_e, rec.event_accepted
        ):
            fh.write(f"{gid},{source},-,0,{float(b)!r},{int(s)},{float(d)!r},{int(a)}\n")
    print(args.events)


def cmd_bench(args) -> int:
    overrides = dict(kv.split("=", 1) for kv in args.set)
    if args.out_dir != ".":
        overrides.setdefault("out_dir", args.out_dir)
    if args.seed is not None:
        overrides.setdefault("seed", str(args.seed))
    if args.threads != 1:
        overrides.setdefault("threads", str(args.threads))
    cfg = bench.load_config(args.config, overrides)
    os.makedirs(cfg.out_dir, exist_ok=True)

    def progress(done, total):
        if args.quiet:
            return
        if done % max(1, total // 20) == 0 or done == total:
            print(f"\r{done}/{total} cells", end="", file=sys.stderr)
            if done == total:
                print(file=sys.stderr)

    rows, summary, accept_lines = bench.run_suite(cfg, progress=progress)
    results_path = os.path.join(cfg.out_dir, args.results_name)
    bench.write_results(rows, results_path)
    bench.write_summary(summary, os.path.join(cfg.out_dir, "summary.csv"))
    print(results_path)
    if cfg.record_acceptance:
        accept_path = os.path.join(cfg.out_dir, "acceptance.csv")
        bench.write_acceptance(accept_lines, accept_path)
        print(accept_path)
    return 0


def cmd_hist(args) -> int:
    z = read_correlations(args.corr)
    inst = read_instance(args.instance)
    wf = None if args.weight_filter == "all" else int(args.weight_filter)
    h = bench.correlation_histogram(z, inst, weight_filter=wf)
    if h.empty:
        print("warning: no edges matched the filter", file=sys.stderr)
    out = args.out or os.path.join(_ensure_out(args), "histogram.csv")
    with open(out, "w") as fh:
        fh.write("source,param,bin_lo,bin_hi,count\n")
        tag = "-" if z.param is None else repr(z.param)
        for k in range(len(h.counts)):
            fh.write(
                f"{z.source},{tag},{float(h.edges[k])!r},{float(h.edges[k + 1])!r},{int(h.counts[k])}\n"
            )
    print(out)
    return 0


def cmd_accept(args) -> int:
    # group acceptance events by (graph_id, source, param, rep) and summarize rates
    with open(args.events) as fh:
        header = fh.readline().strip()
        if header != bench.ACCEPT_HEADER:
            raise CorrclustError(f"unexpected events header: {header}")
        groups: dict[tuple, list[tuple[float, bool]]] = {}
        for line in fh:
            gid, source, param, rep, beta, size, de, acc = line.strip().split(",")
            groups.setdefault((gid, source, param, rep), []).append(
                (float(beta), acc == "1")
            )
    lo, hi = args.beta_min, args.beta_max
    rates: dict[tuple, list[float]] = {}
    for (gid, source, param, rep), events in groups.items():
        window = [a for b, a in events if lo <= b <= hi]
        if window:
            rates.setdefault((source, param), []).append(
                sum(window) / len(window)
            )
    out = args.out or os.path.join(_ensure_out(args), "acceptance_summary.csv")
    with open(out, "w") as fh:
        fh.write("source,param,n_runs,q1,median,q3\n")
        for (source, param), rs in sorted(rates.items()):
            q1, med, q3 = (float(v) for v in np.percentile(np.asarray(rs), [25.0, 50.0, 75.0]))
            fh.write(f"{source},{param},{len(rs)},{q1!r},{med!r},{q3!r}\n")
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrclust",
        description="Correlation-guided cluster Monte Carlo toolkit for Ising / Max-Cut",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen", help="generate a regular-graph instance suite")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--weights", default="-1,1", help="comma list of allowed weights")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("exact", help="register reference energies")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--method", choices=["brute_force", "long_sa"], default="brute_force")
    p.add_argument("--refresh", help="results CSV whose is_optimal column to re-derive")
    _add_common(p)
    p.set_defaults(func=cmd_exact)

    p = subs.add_parser("corr", help="precompute correlation matrices to files")
    p.add_argument("--source", choices=list(bench.KNOWN_SOURCES), required=True)
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--param", type=float, nargs="*", default=[], help="beta_s or depth list")
    p.add_argument("--angles", help="beta1,gamma1 for qaoa-p1")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--save-params", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_corr)

    p = subs.add_parser("run", help="one optimization run")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=["SA", "CA"], default="CA")
    p.add_argument("--corr", help="correlation file (default: coupling constants)")
    p.add_argument("--p-const", type=float, help="random-cluster link probability")
    p.add_argument("--lambda-scale", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=100, help="iterations as multiple of n")
    p.add_argument("--beta-f", type=float, default=8.0)
    p.add_argument("--events", help="write per-proposal acceptance events CSV here")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("bench", help="run a benchmark suite from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--results-name", default="results.csv")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_bench)

    p = subs.add_parser("hist", help="correlation histogram over filtered edges")
    p.add_argument("--corr", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--weight-filter", choices=["+1", "-1", "1", "all"], default="all")
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=cmd_hist)

    p = subs.add_parser("accept", help="acceptance-rate summary from an events CSV")
    p.add_argument("--events", required=True)
    p.add_argument("--beta-min", type=float, default=1.0)
    p.add_argument("--beta-max", type=float, default=8.0)
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=cmd_accept)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CorrclustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
