"""Command-line entry point: ``comsearch <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

import numpy as np

from .baseline import select_target, spectral_cluster
from .bench import ExperimentConfig, polblogs_table, run_experiment, summarize
from .errors import CommunitySearchError
from .files import load_node_set, load_weights, save_node_set, save_weights
from .graph import (SbmParams, generate_sbm, linear_alpha, load_edge_list, load_ground_truth,
                    save_edge_list, save_ground_truth)
from .search import community_search, exact_recovery_refine
from .sideinfo import (WeightScope, choose_labeled, labeled_weights, recommended_radius,
                       synthetic_weights)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6f}"
    return str(x)


def _emit(pairs) -> None:
    for key, value in pairs:
        print(f"{key}: {_fmt(value)}")


def _tau_arg(s: str):
    if s == "auto":
        return s
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("tau must be 'auto' or a number") from None


def _radius_arg(s: str):
    if s == "auto":
        return s
    try:
        r = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("r must be 'auto' or an integer") from None
    if r < 1:
        raise argparse.ArgumentTypeError("r must be >= 1")
    return r


def cmd_generate(args) -> int:
    if args.alpha:
        alpha = tuple(args.alpha)
    elif args.alpha_min is not None:
        alpha = linear_alpha(args.k, args.alpha_min)
    else:
        alpha = tuple([1.0 / args.k] * args.k)
    graph, truth = generate_sbm(SbmParams(args.n, args.k, args.p, args.q, alpha), args.seed, args.shuffle)
    save_edge_list(graph, args.out_edges)
    save_ground_truth(truth, args.out_labels)
    _emit([("nodes", graph.n), ("edges", graph.n_edges)]
          + [(f"size_{i}", int(s)) for i, s in enumerate(truth.sizes())])
    return 0


def cmd_weights(args) -> int:
    graph = load_edge_list(args.graph)
    if args.kind == "synthetic":
        truth = load_ground_truth(args.labels, graph.n)
        w = synthetic_weights(truth, args.target, args.w_lo, args.w_hi, args.rho, args.seed)
    else:
        if args.labeled:
            labeled = load_node_set(args.labeled)
        else:
            truth = load_ground_truth(args.labels, graph.n)
            labeled = choose_labeled(truth, args.target, args.m, args.seed)
            if args.out_labeled:
                save_node_set(labeled, args.out_labeled)
        r = args.r
        if r == "auto":
            r = recommended_radius(graph.n, 2.0 * graph.n_edges / max(graph.n, 1), labeled.size)
        w = labeled_weights(graph, labeled, r, WeightScope(args.scope))
        _emit([("radius", r), ("labeled", labeled.size)])
    save_weights(w, args.out)
    _emit([("mean_weight", float(np.mean(w))), ("max_weight", float(np.max(w)))])
    return 0


def cmd_search(args) -> int:
    graph = load_edge_list(args.graph)
    w = load_weights(args.weights, graph.n)
    tau = None
    if args.tau != "auto":
        tau = args.tau
    elif args.p is not None and args.q is not None:
        tau = (args.p + args.q) / 2.0
    est = community_search(graph, args.k, w, tau=tau, seed=args.seed)
    if args.refine:
        est = exact_recovery_refine(graph, est, args.p, args.q)
    nodes = est.nodes
    if args.labeled:
        nodes = np.union1d(nodes, load_node_set(args.labeled))
    save_node_set(nodes, args.out)
    _emit([("size", nodes.size), ("alpha_hat", est.alpha_hat), ("sigma_gap", est.sigma_gap),
           ("reliable", est.reliable), ("refined", est.refined)])
    for d in est.rotations:
        _emit([(f"rotation_{d.rotation}.sigma1", d.sigma1), (f"rotation_{d.rotation}.sigma2", d.sigma2),
               (f"rotation_{d.rotation}.tau", d.tau), (f"rotation_{d.rotation}.selected", d.n_selected),
               (f"rotation_{d.rotation}.whitening_residual", d.whitening_residual)])
    return 0


def cmd_cluster(args) -> int:
    graph = load_edge_list(args.graph)
    clustering = spectral_cluster(graph, args.k)
    if args.out_assignment:
        with open(args.out_assignment, "w") as fh:
            for i, c in enumerate(clustering.assignment):
                fh.write(f"{i} {c}\n")
    sizes = np.bincount(clustering.assignment, minlength=args.k)
    _emit([(f"cluster_{c}", int(s)) for c, s in enumerate(sizes)])
    if args.weights:
        chosen = select_target(clustering, load_weights(args.weights, graph.n))
        if args.out:
            save_node_set(clustering.members(chosen), args.out)
        _emit([("target_cluster", chosen)])
    return 0


def cmd_bench(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    raw["seed"] = args.seed
    if args.trials is not None:
        raw["trials"] = args.trials
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.no_timing:
        raw["timing"] = False
    cfg = ExperimentConfig.from_dict(raw)
    rows = run_experiment(cfg, args.out)
    for s in summarize(rows):
        print(" ".join(f"{k}={_fmt(v)}" for k, v in s.items()))
    return 0


def cmd_polblogs(args) -> int:
    table = polblogs_table(args.edges, args.labels, m_values=args.m, draws=args.draws, r=args.r,
                           seed=args.seed, spectral=not args.no_spectral)
    print("m algorithm mean_error best_error")
    for t in table:
        print(f"{t['m']} {t['algorithm']} {t['mean_error']:.6f} {t['best_error']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="comsearch", description="Single-community search on graphs")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample an SBM graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--q", type=float, required=True)
    g.add_argument("--alpha", type=float, nargs="+")
    g.add_argument("--alpha-min", type=float)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--shuffle", action="store_true")
    g.add_argument("--out-edges", required=True)
    g.add_argument("--out-labels", required=True)
    g.set_defaults(func=cmd_generate)

    w = sub.add_parser("weights", help="build a node-weight file")
    w.add_argument("--graph", required=True)
    w.add_argument("--kind", choices=("synthetic", "labeled"), default="synthetic")
    w.add_argument("--labels", help="ground-truth file (node community)")
    w.add_argument("--target", type=int, default=0)
    w.add_argument("--w-lo", type=float, default=5.0)
    w.add_argument("--w-hi", type=float, default=10.0)
    w.add_argument("--rho", type=float, default=0.8)
    w.add_argument("--labeled", help="file of labeled node ids")
    w.add_argument("--m", type=int, default=10)
    w.add_argument("--r", type=_radius_arg, default=1)
    w.add_argument("--scope", choices=[s.value for s in WeightScope], default="whole")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", required=True)
    w.add_argument("--out-labeled")
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("search", help="run community search")
    s.add_argument("--graph", required=True)
    s.add_argument("--weights", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--tau", type=_tau_arg, default="auto")
    s.add_argument("--p", type=float)
    s.add_argument("--q", type=float)
    s.add_argument("--refine", action="store_true")
    s.add_argument("--labeled", help="labeled node ids to force into the result")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("cluster", help="spectral clustering baseline")
    c.add_argument("--graph", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--weights")
    c.add_argument("--out")
    c.add_argument("--out-assignment")
    c.set_defaults(func=cmd_cluster)

    b = sub.add_parser("bench", help="run an experiment config")
    b.add_argument("--config", required=True)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--trials", type=int)
    b.add_argument("--workers", type=int)
    b.add_argument("--no-timing", action="store_true")
    b.set_defaults(func=cmd_bench)

    pb = sub.add_parser("polblogs", help="political blogs labeled-node table")
    pb.add_argument("--edges", required=True)
    pb.add_argument("--labels")
    pb.add_argument("--m", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    pb.add_argument("--draws", type=int, default=50)
    pb.add_argument("--r", type=int, default=1)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--no-spectral", action="store_true")
    pb.set_defaults(func=cmd_polblogs)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except (CommunitySearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
