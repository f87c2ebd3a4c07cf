"""Experiment runner: SBM and political-blogs protocols, metrics and CSV output.

A config is a JSON object::

    {
      "experiment_id": "synthetic-k5",
      "mode": "synthetic-weights",          # labeled-nodes | parallel | polblogs
      "sbm": {"n": 1000, "k": 5, "p": 0.2, "q": 0.05, "alpha_min": 0.1},
      "dataset": {"edges": "...", "labels": "..."},          # polblogs only
      "weights": {"w_lo": 5, "w_hi": 10, "rho": 0.8},        # or {"m": 10, "r": 1}
      "sweep": {"name": "p_minus_q", "values": [0.1, 0.2]},
      "targets": "all",
      "trials": 20,
      "seed": 0,
      "algorithms": ["search", "spectral"],
      "tau": "known",                       # "auto" or a number
      "refine": false,
      "timing": true,
      "workers": 1
    }

Sweep names: ``p_minus_q`` (p = q + value), ``sigma_gap`` (expected weight
gap, via rho), ``m`` (labeled nodes per target), ``k_assumed`` (k handed to
the algorithms), ``none``.  ``sbm.alpha`` may replace ``alpha_min``; with
neither the communities are equal.  ``weights.r`` may be ``"auto"``.

Trial seeds are ``SeedSequence([seed, sweep_index, trial_index])``; every
random draw inside a trial comes from that sequence.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .baseline import select_target, spectral_cluster
from .errors import DatasetWarning, ParameterError
from .graph import Graph, GroundTruth, SbmParams, generate_sbm, largest_connected_component, linear_alpha
from .search import community_search, exact_recovery_refine, parallel_search
from .sideinfo import (choose_labeled, labeled_weights, recommended_radius, rho_for_gap,
                       synthetic_weights)

log = logging.getLogger(__name__)

MODES = ("synthetic-weights", "labeled-nodes", "parallel", "polblogs")
SWEEPS = ("p_minus_q", "sigma_gap", "m", "k_assumed", "none")
ALGORITHMS = ("search", "spectral")
CSV_COLUMNS = ("experiment_id", "algorithm", "sweep_name", "sweep_value", "trial", "seed", "target",
               "error", "frac_error", "runtime_s", "speedup", "sigma_gap", "failed")
POLBLOGS_NODES = 1222
POLBLOGS_EDGES = 16716
POLBLOGS_SIZES = (586, 636)


def estimation_error(estimate, truth) -> int:
    """Size of the symmetric difference of two node sets."""
    return int(np.setxor1d(np.asarray(list(estimate), dtype=np.int64),
                           np.asarray(list(truth), dtype=np.int64)).size)


def speedup(t_ref: float, t_alg: float) -> float:
    """How many times faster the algorithm ran than the reference."""
    if t_ref <= 0 or t_alg <= 0:
        raise ParameterError("runtimes must be positive")
    return t_ref / t_alg


def trial_seed(master: int, sweep_index: int, trial_index: int) -> int:
    ss = np.random.SeedSequence([master, sweep_index, trial_index])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ExperimentConfig:
    experiment_id: str
    mode: str
    sbm: dict = field(default_factory=dict)
    dataset: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=lambda: {"name": "none", "values": [0]})
    targets: Any = "all"
    trials: int | None = None
    seed: int = 0
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    tau: Any = None
    refine: bool = False
    timing: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        if self.trials is None:
            self.trials = 50 if self.mode == "polblogs" else 20
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.sweep.get("name") not in SWEEPS:
            raise ParameterError(f"sweep name must be one of {SWEEPS}")
        if not self.sweep.get("values"):
            raise ParameterError("sweep grid must be nonempty")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad or not self.algorithms:
            raise ParameterError(f"unknown algorithms {sorted(bad)}")
        if self.tau is None:
            self.tau = "auto" if self.mode == "polblogs" else "known"
        if not (self.tau in ("known", "auto") or isinstance(self.tau, (int, float))):
            raise ParameterError("tau must be 'known', 'auto' or a number")
        if self.mode == "polblogs":
            if not {"edges"} <= set(self.dataset):
                raise ParameterError("polblogs mode needs dataset.edges")
            if self.tau == "known":
                raise ParameterError("p and q are unknown for a real dataset; use tau 'auto'")
        elif not {"n", "k", "p", "q"} <= set(self.sbm):
            raise ParameterError("sbm needs n, k, p, q")
        if self.mode == "synthetic-weights":
            self.weights = {"w_lo": 5.0, "w_hi": 10.0, "rho": 0.8, **self.weights}
        else:
            self.weights = {"m": 10, "r": 1, **self.weights}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ResultRow:
    experiment_id: str
    algorithm: str
    sweep_name: str
    sweep_value: float
    trial: int
    seed: int
    target: int
    error: int
    frac_error: float
    runtime_s: float | None
    speedup: float | None
    sigma_gap: float
    failed: bool
    a1_holds: bool = True

    def csv_record(self) -> list[str]:
        def num(x):
            return "" if x is None else f"{x:.6f}"
        return [self.experiment_id, self.algorithm, self.sweep_name, num(self.sweep_value),
                str(self.trial), str(self.seed), str(self.target), str(self.error),
                num(self.frac_error), num(self.runtime_s), num(self.speedup),
                num(self.sigma_gap), "1" if self.failed else "0"]


def _sbm_params(sbm: dict, p: float | None = None) -> SbmParams:
    n, k, q = int(sbm["n"]), int(sbm["k"]), float(sbm["q"])
    p = float(sbm["p"]) if p is None else p
    if "alpha" in sbm:
        alpha = tuple(sbm["alpha"])
    elif "alpha_min" in sbm:
        alpha = linear_alpha(k, float(sbm["alpha_min"]))
    else:
        alpha = tuple([1.0 / k] * k)
    return SbmParams(n, k, p, q, alpha)


@dataclass
class _Point:
    """Everything that varies along the sweep axis."""
    params: SbmParams | None
    k_alg: int
    rho: float | None
    m: int | None


def _point(cfg: ExperimentConfig, value: float) -> _Point:
    name = cfg.sweep["name"]
    params = None
    if cfg.mode != "polblogs":
        params = _sbm_params(cfg.sbm, float(cfg.sbm["q"]) + value if name == "p_minus_q" else None)
    k_true = params.k if params else 2
    k_alg = int(value) if name == "k_assumed" else k_true
    rho = m = None
    if cfg.mode == "synthetic-weights":
        w = cfg.weights
        rho = rho_for_gap(value, w["w_lo"], w["w_hi"]) if name == "sigma_gap" else float(w["rho"])
    else:
        m = int(value) if name == "m" else int(cfg.weights["m"])
    return _Point(params, k_alg, rho, m)


def _tau(cfg: ExperimentConfig, params: SbmParams | None):
    if cfg.tau == "auto":
        return None
    if cfg.tau == "known":
        return (params.p + params.q) / 2.0
    return float(cfg.tau)


def _radius(cfg: ExperimentConfig, graph: Graph, m: int) -> int:
    r = cfg.weights.get("r", 1)
    if r == "auto":
        return recommended_radius(graph.n, 2.0 * graph.n_edges / graph.n, m)
    return int(r)


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, max(time.perf_counter() - t0, 1e-9)


def _run_trial(cfg: ExperimentConfig, pt: _Point, value: float, sweep_index: int, trial: int,
               dataset: tuple[Graph, GroundTruth] | None) -> list[ResultRow]:
    ts = trial_seed(cfg.seed, sweep_index, trial)
    draws = np.random.SeedSequence(ts).generate_state(4, np.uint64)
    graph_seed, weight_seed, part_seed, _ = (int(x) for x in draws)

    if dataset is None:
        graph, truth = generate_sbm(pt.params, graph_seed)
        params = pt.params
    else:
        graph, truth = dataset
        params = None
    k_true = truth.k
    targets = range(k_true) if cfg.targets == "all" else [int(t) for t in cfg.targets]
    if cfg.mode == "polblogs":
        targets = [0]
    tau = _tau(cfg, params)
    pq = (params.p, params.q) if params is not None else (None, None)
    rng = np.random.default_rng(weight_seed)

    # side information, one weight vector (and labeled set) per target
    labeled: dict[int, np.ndarray] = {}
    weights: dict[int, np.ndarray] = {}
    if cfg.mode == "synthetic-weights":
        w = cfg.weights
        for t in targets:
            weights[t] = synthetic_weights(truth, t, w["w_lo"], w["w_hi"], pt.rho, int(rng.integers(2**63)))
    else:
        label_targets = range(k_true) if cfg.mode in ("parallel", "polblogs") else targets
        for t in label_targets:
            labeled[t] = choose_labeled(truth, t, pt.m, int(rng.integers(2**63)))
        r = _radius(cfg, graph, pt.m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for t in targets:
                weights[t] = labeled_weights(graph, labeled[t], r)

    def finalize(t, nodes):
        nodes = np.asarray(nodes, dtype=np.int64)
        if labeled:
            nodes = np.union1d(nodes, labeled[t])
            for other, lab in labeled.items():
                if other != t:
                    nodes = np.setdiff1d(nodes, lab)
        return nodes

    # empirical bias diagnostics per target: sigma1 - sigma2 and whether (A1) holds
    sizes = truth.sizes()
    cond = {}
    for t in targets:
        omega = np.bincount(truth.assignment, weights=weights[t], minlength=k_true) / sizes
        others = np.delete(omega, t)
        top = float(others.max()) if others.size else 0.0
        cond[t] = (float(omega[t]) - top, bool((others < omega[t]).all()))

    rows: list[ResultRow] = []
    spectral_time = None

    def row(alg, t, nodes, runtime, failed):
        members = truth.members(t)
        err = members.size if failed else estimation_error(nodes, members)
        return ResultRow(cfg.experiment_id, alg, cfg.sweep["name"], float(value), trial, ts, t, err,
                         err / members.size, runtime if cfg.timing else None, None,
                         cond[t][0], failed, cond[t][1])

    if "spectral" in cfg.algorithms:
        try:
            clustering, spectral_time = _timed(spectral_cluster, graph, pt.k_alg)
            for t in targets:
                chosen, dt = _timed(select_target, clustering, weights[t])
                rows.append(row("spectral", t, finalize(t, clustering.members(chosen)),
                                spectral_time + dt, False))
        except Exception as exc:
            log.warning("spectral baseline failed: %s", exc)
            spectral_time = None
            rows.extend(row("spectral", t, [], None, True) for t in targets)

    if "search" in cfg.algorithms:
        def search_one(w, tau_t):
            est = community_search(graph, pt.k_alg, w, tau=tau_t, seed=part_seed)
            if cfg.refine:
                est = exact_recovery_refine(graph, est, *pq)
            return est

        if cfg.mode == "parallel":
            results, elapsed = _timed(parallel_search, graph, pt.k_alg, [weights[t] for t in targets],
                                      [tau] * len(targets), part_seed, 1)
            if cfg.refine:
                results = [r if isinstance(r, Exception) else exact_recovery_refine(graph, r, *pq)
                           for r in results]
            timed = [(res, elapsed) for res in results]
        else:
            timed = []
            for t in targets:
                try:
                    timed.append(_timed(search_one, weights[t], tau))
                except Exception as exc:
                    timed.append((exc, None))
        for t, (res, elapsed) in zip(targets, timed):
            if isinstance(res, Exception):
                log.info("search failed for target %d: %s", t, res)
                rows.append(row("search", t, [], elapsed, True))
                continue
            r = row("search", t, finalize(t, res.nodes), elapsed, False)
            rows.append(r)

    if cfg.timing and spectral_time is not None:
        for r in rows:
            if r.runtime_s is not None and not r.failed:
                ref = next((x.runtime_s for x in rows if x.algorithm == "spectral"
                            and x.target == r.target and not x.failed), None)
                if ref is not None:
                    r.speedup = speedup(ref, r.runtime_s)
    return rows


def run_experiment(config: ExperimentConfig | dict, out_csv: str | Path | None = None) -> list[ResultRow]:
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    dataset = None
    if cfg.mode == "polblogs":
        dataset = load_polblogs(cfg.dataset["edges"], cfg.dataset.get("labels"))
    if "spectral" in cfg.algorithms:
        # compile the SLINK kernel before any timed region
        spectral_cluster(Graph.from_edges(4, [(0, 1), (2, 3)]), 2)

    rows: list[ResultRow] = []
    for si, value in enumerate(cfg.sweep["values"]):
        value = float(value)
        pt = _point(cfg, value)
        jobs = range(cfg.trials)
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                chunks = list(pool.map(lambda t: _run_trial(cfg, pt, value, si, t, dataset), jobs))
        else:
            chunks = [_run_trial(cfg, pt, value, si, t, dataset) for t in jobs]
        for c in chunks:
            rows.extend(c)
        log.info("%s: sweep %s=%g done", cfg.experiment_id, cfg.sweep["name"], value)

    if out_csv is not None:
        write_csv(rows, out_csv)
        with open(Path(str(out_csv) + ".summary.json"), "w") as fh:
            json.dump(summarize(rows), fh, indent=2, sort_keys=True)
    return rows


def write_csv(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(r.csv_record())


def summarize(rows: list[ResultRow]) -> list[dict]:
    """Per (algorithm, sweep value): mean errors over all targets and over the
    targets whose weights satisfied the bias condition, best error, runtime."""
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.sweep_value), []).append(r)
    out = []
    for (alg, value), rs in sorted(groups.items()):
        ok = [r for r in rs if r.a1_holds]
        times = [r.runtime_s for r in rs if r.runtime_s is not None and not r.failed]
        out.append({
            "algorithm": alg,
            "sweep_value": round(value, 6),
            "rows": len(rs),
            "failures": sum(r.failed for r in rs),
            "mean_error": round(float(np.mean([r.error for r in rs])), 6),
            "mean_frac_error": round(float(np.mean([r.frac_error for r in rs])), 6),
            "mean_frac_error_a1": round(float(np.mean([r.frac_error for r in ok])), 6) if ok else None,
            "best_error": int(min(r.error for r in rs)),
            "mean_runtime_s": round(float(np.mean(times)), 6) if times else None,
        })
    return out


_GML_NODE = re.compile(r"node\s*\[(.*?)\]", re.S)
_GML_EDGE = re.compile(r"edge\s*\[(.*?)\]", re.S)


def _gml_field(body: str, key: str) -> str | None:
    m = re.search(rf"\b{key}\s+(\"[^\"]*\"|\S+)", body)
    return m.group(1).strip('"') if m else None


def _read_gml(path) -> tuple[list[tuple[str, str]], dict[str, str]]:
    text = Path(path).read_text(errors="replace")
    labels = {}
    for body in _GML_NODE.findall(text):
        node, value = _gml_field(body, "id"), _gml_field(body, "value")
        if node is not None and value is not None:
            labels[node] = value
    edges = [(_gml_field(b, "source"), _gml_field(b, "target")) for b in _GML_EDGE.findall(text)]
    return [e for e in edges if None not in e], labels


def _read_pairs(path) -> list[tuple[str, str]]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) >= 2 and not parts[0].startswith("#"):
                pairs.append((parts[0], parts[1]))
    return pairs


def load_polblogs(edge_path: str | Path, label_path: str | Path | None = None) -> tuple[Graph, GroundTruth]:
    """Load the political-blogs network: undirected simple graph restricted to
    labelled nodes, largest connected component, communities numbered by
    sorted label value.

    ``edge_path`` is either the GML file (labels in the node ``value`` field)
    or a whitespace edge list with arbitrary node names, in which case
    ``label_path`` holds ``node label`` lines.
    """
    edge_path = Path(edge_path)
    if not edge_path.exists():
        raise FileNotFoundError(edge_path)
    if edge_path.suffix.lower() == ".gml":
        pairs, labels = _read_gml(edge_path)
    else:
        pairs, labels = _read_pairs(edge_path), {}
    if label_path is not None:
        if not Path(label_path).exists():
            raise FileNotFoundError(label_path)
        labels = {a: b for a, b in _read_pairs(label_path)}
    if not labels:
        raise ParameterError("no community labels found")

    names = sorted(labels, key=lambda s: (len(s), s))
    index = {name: i for i, name in enumerate(names)}
    edges = [(index[a], index[b]) for a, b in pairs if a in index and b in index]
    full = Graph.from_edges(len(names), edges)
    graph, mapping = largest_connected_component(full)
    classes = sorted({labels[names[old]] for old in mapping})
    cls_index = {c: i for i, c in enumerate(classes)}
    assignment = np.empty(graph.n, dtype=np.int64)
    for old, new in mapping.items():
        assignment[new] = cls_index[labels[names[old]]]
    truth = GroundTruth(assignment)

    sizes = tuple(sorted(int(s) for s in truth.sizes()))
    if (graph.n, graph.n_edges, sizes) != (POLBLOGS_NODES, POLBLOGS_EDGES, POLBLOGS_SIZES):
        warnings.warn(f"political blogs: got n={graph.n}, edges={graph.n_edges}, sizes={sizes}; "
                      f"expected n={POLBLOGS_NODES}, edges={POLBLOGS_EDGES}, sizes={POLBLOGS_SIZES}",
                      DatasetWarning, stacklevel=2)
    return graph, truth


def polblogs_table(edge_path, label_path=None, m_values=(2, 4, 6, 8, 10), draws: int = 50,
                   r: int = 1, seed: int = 0, spectral: bool = True) -> list[dict]:
    """Mean and best classification error per labeled-set size."""
    out = []
    for m in m_values:
        cfg = ExperimentConfig(
            experiment_id=f"polblogs-m{m}", mode="polblogs",
            dataset={"edges": str(edge_path), **({"labels": str(label_path)} if label_path else {})},
            weights={"m": int(m), "r": r}, trials=draws, seed=seed,
            algorithms=["search", "spectral"] if spectral else ["search"], timing=False)
        rows = run_experiment(cfg)
        for alg in cfg.algorithms:
            errs = [x.error for x in rows if x.algorithm == alg]
            out.append({"m": int(m), "algorithm": alg, "mean_error": float(np.mean(errs)),
                        "best_error": int(min(errs)), "draws": len(errs)})
    return out
