"""Experiment grid execution, averaging, best counts and report files."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
import time
import tracemalloc
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, kernels
from .datasets import DatasetDescriptor, descriptor_from_dict, load_dataset
from .metrics import (HIGHER_IS_BETTER, check_range, degenerate_denominator, hellinger, kl_divergence,
                      ks_statistic, mae, mean_relative_error, mse, partition_scores, relative_error,
                      sorted_scores)
from .privacy import PrivacyBudget
from .queries import (EXACT_PATH_LIMIT, SAMPLED_SOURCES, QueryError, QueryId, evaluate,
                      local_clustering, resolve_query)
from .rng import derive_seed
from .synth import ALGORITHMS, LEDGER_TEMPLATES, NEEDS_DELTA, ConfigError, Synthesizer, generate

DEFAULT_EPSILONS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_REPETITIONS = 10
DEFAULT_DELTA = 0.01
TIE_TOL = 1e-12
SCHEMA_VERSION = 1
MEMORY_METHOD = "tracemalloc allocation high-water mark in the synthesis call (best effort)"

PRIMARY_METRIC = {q: "RE" for q in QueryId}
PRIMARY_METRIC.update({QueryId.Q6: "KL", QueryId.Q9: "KL", QueryId.Q12: "NMI", QueryId.Q15: "MAE"})

RAW_COLUMNS = ["algorithm", "dataset", "epsilon", "query", "repetition", "metric", "value",
               "wall_s", "peak_bytes", "warnings"]
RESOURCE_COLUMNS = ("wall_s", "peak_bytes")


@dataclass
class ExperimentGrid:
    algorithms: list
    datasets: list
    epsilons: list = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    queries: list = field(default_factory=lambda: list(QueryId))
    repetitions: int = DEFAULT_REPETITIONS
    root_seed: int = 0
    delta: float = DEFAULT_DELTA
    algorithm_config: dict = field(default_factory=dict)
    base_dir: str | None = None

    def __post_init__(self):
        self.algorithms = [a if isinstance(a, Synthesizer) else
                           Synthesizer(a, dict(self.algorithm_config.get(a, {})))
                           for a in self.algorithms]
        self.queries = [resolve_query(q) for q in self.queries]
        self.epsilons = [float(e) for e in self.epsilons]
        problems = []
        if not self.algorithms:
            problems.append("no algorithms")
        if not self.datasets:
            problems.append("no datasets")
        if not self.epsilons:
            problems.append("no epsilons")
        if not self.queries:
            problems.append("no queries")
        if any(not (e > 0 and math.isfinite(e)) for e in self.epsilons):
            problems.append("epsilons must be positive and finite")
        if int(self.repetitions) < 1:
            problems.append("repetitions must be positive")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            problems.append("duplicate algorithms")
        if problems:
            raise ConfigError("; ".join(problems))
        self.repetitions = int(self.repetitions)

    @property
    def algorithm_names(self) -> list[str]:
        return [a.name for a in self.algorithms]

    @property
    def dataset_names(self) -> list[str]:
        return [d.name for d in self.datasets]

    @property
    def synthesis_count(self) -> int:
        return len(self.algorithms) * len(self.datasets) * len(self.epsilons) * self.repetitions

    def to_dict(self) -> dict:
        return {
            "algorithms": [{"name": a.name, "config": _jsonable(a.config)} for a in self.algorithms],
            "datasets": [{"name": d.name, "source": d.source, "type": d.type_tag,
                          "expected_n": d.expected_n, "expected_m": d.expected_m} for d in self.datasets],
            "epsilons": self.epsilons,
            "queries": [q.label for q in self.queries],
            "repetitions": self.repetitions,
            "root_seed": self.root_seed,
            "delta": self.delta,
        }


@dataclass
class MetricEntry:
    query: str
    metric: str
    value: float
    primary: bool
    warnings: tuple = ()


@dataclass
class CellResult:
    algorithm: str
    dataset: str
    epsilon: float
    repetition: int
    seed: int
    wall_s: float = 0.0
    peak_bytes: int = 0
    status: str = "ok"
    warnings: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    output_n: int = 0
    output_m: int = 0

    @property
    def key(self):
        return (self.algorithm, self.dataset, self.epsilon, self.repetition)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def cell_seed(root_seed, algorithm, dataset, epsilon, repetition) -> int:
    return derive_seed(root_seed, "cell", algorithm, dataset, float(epsilon), int(repetition))


# ---------------------------------------------------------------- resources

def _measure(thunk, track_memory=True):
    started = False
    if track_memory:
        if not tracemalloc.is_tracing():
            tracemalloc.start()
            started = True
        tracemalloc.reset_peak()
        base = tracemalloc.get_traced_memory()[0]
    t0 = time.perf_counter()
    try:
        result = thunk()
    finally:
        wall = time.perf_counter() - t0
        peak = 0
        if track_memory:
            peak = max(0, tracemalloc.get_traced_memory()[1] - base)
            if started:
                tracemalloc.stop()
    return result, wall, peak


def measure_resources(thunk) -> tuple[float, int]:
    """(wall seconds, peak allocated bytes) of calling ``thunk``."""
    _, wall, peak = _measure(thunk)
    return wall, peak


# ---------------------------------------------------------------- scoring

@dataclass
class TrueValues:
    values: dict          # QueryId -> QueryValue
    errors: dict          # QueryId -> message
    local_clustering: np.ndarray


def true_values(g, queries, seed) -> TrueValues:
    vals, errs = {}, {}
    for q in queries:
        try:
            vals[q] = evaluate(q, g, seed)
        except QueryError as exc:
            errs[q] = str(exc)
    return TrueValues(vals, errs, local_clustering(g))


def score_query(q: QueryId, tv, sv, true_lc=None, syn_lc=None) -> list[MetricEntry]:
    """Primary metric first, then the supplementary ones."""
    label = q.label
    out = []
    if q.kind == "scalar":
        flags = ("degenerate-denominator",) if degenerate_denominator(tv.value) else ()
        flags += tuple(sv.flags)
        out.append(MetricEntry(label, "RE", relative_error(tv.value, sv.value), True, flags))
        if q is QueryId.Q11 and true_lc is not None and syn_lc is not None:
            a, b = sorted_scores(true_lc), sorted_scores(syn_lc)
            k = max(a.size, b.size)
            a, b = np.pad(a, (0, k - a.size)), np.pad(b, (0, k - b.size))
            out.append(MetricEntry(label, "MRE", mean_relative_error(a, b), False, ("sorted-alignment",)))
            out.append(MetricEntry(label, "MSE", mse(a, b), False, ("sorted-alignment",)))
    elif q.kind == "distribution":
        flags = tuple(sv.flags)
        out.append(MetricEntry(label, "KL", kl_divergence(tv.value, sv.value), True, flags))
        out.append(MetricEntry(label, "HD", hellinger(tv.value, sv.value), False, flags))
        out.append(MetricEntry(label, "KS", ks_statistic(tv.value, sv.value), False, flags))
    elif q.kind == "partition":
        scores, flags = partition_scores(tv.value, sv.value)
        for i, name in enumerate(("NMI", "ARI", "AMI", "Avg-F1")):
            out.append(MetricEntry(label, name, scores[name], i == 0, tuple(flags)))
    else:
        a, b = sorted_scores(tv.value), sorted_scores(sv.value)
        flags = ("sorted-alignment",) + tuple(sv.flags)
        out.append(MetricEntry(label, "MAE", mae(a, b), True, flags))
        out.append(MetricEntry(label, "MSE", mse(a, b), False, flags))
    for e in out:
        if not check_range(e.metric, e.value):
            raise AssertionError(f"{e.metric}={e.value} outside its declared range")
    return out


def _failed_entries(q: QueryId, message: str) -> list[MetricEntry]:
    return [MetricEntry(q.label, PRIMARY_METRIC[q], float("nan"), True, (message,))]


# ---------------------------------------------------------------- grid

def run_cell(task) -> CellResult:
    """One synthesis plus all queries; failures are captured in the result."""
    (alg, ds_name, g, eps, rep, root_seed, delta, queries, tv, track_memory) = task
    seed = cell_seed(root_seed, alg.name, ds_name, eps, rep)
    cell = CellResult(alg.name, ds_name, eps, rep, seed)
    budget = PrivacyBudget(eps, delta)
    try:
        rec, wall, peak = _measure(lambda: generate(alg, g, budget, seed), track_memory)
    except Exception as exc:  # noqa: BLE001 - isolate every cell
        cell.status = "failed"
        msg = f"synthesis-failed: {type(exc).__name__}: {exc}"
        cell.warnings.append(msg)
        for q in queries:
            cell.metrics.extend(_failed_entries(q, f"true-query-error: {tv.errors[q]}" if q in tv.errors else msg))
        return cell
    cell.wall_s, cell.peak_bytes = wall, peak
    cell.warnings.extend(rec.warnings)
    cell.ledger = rec.ledger.to_dict()
    out = rec.output
    cell.output_n, cell.output_m = out.n, out.m
    syn_seed = derive_seed(seed, "query")
    syn_lc = local_clustering(out) if QueryId.Q11 in queries else None
    for q in queries:
        if q in tv.errors:
            # undefined on the input graph: every algorithm gets NaN and ties
            cell.metrics.extend(_failed_entries(q, f"true-query-error: {tv.errors[q]}"))
            continue
        try:
            sv = evaluate(q, out, syn_seed)
            cell.metrics.extend(score_query(q, tv.values[q], sv, tv.local_clustering, syn_lc))
        except QueryError as exc:
            cell.metrics.extend(_failed_entries(q, f"query-error: {exc}"))
    return cell


def run_grid(grid: ExperimentGrid, workers: int = 1, track_memory: bool = True, progress=None) -> list[CellResult]:
    """Run every (algorithm, dataset, epsilon, repetition) cell.

    Results come back in sorted cell order regardless of worker count.
    """
    graphs, truth = {}, {}
    for d in grid.datasets:
        g = load_dataset(d, grid.base_dir)
        graphs[d.name] = g
        truth[d.name] = true_values(g, grid.queries, derive_seed(grid.root_seed, "truth", d.name))
    tasks = []
    for alg in grid.algorithms:
        for d in grid.datasets:
            for eps in grid.epsilons:
                for rep in range(grid.repetitions):
                    tasks.append((alg, d.name, graphs[d.name], eps, rep, grid.root_seed, grid.delta,
                                  grid.queries, truth[d.name], track_memory))
    results = []
    if workers <= 1:
        for i, t in enumerate(tasks):
            results.append(run_cell(t))
            if progress:
                progress(i + 1, len(tasks), results[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, r in enumerate(pool.map(run_cell, tasks, chunksize=1)):
                results.append(r)
                if progress:
                    progress(i + 1, len(tasks), r)
    order = {a: i for i, a in enumerate(grid.algorithm_names)}
    dorder = {d: i for i, d in enumerate(grid.dataset_names)}
    results.sort(key=lambda c: (order[c.algorithm], dorder[c.dataset], c.epsilon, c.repetition))
    return results


def metric_rows(cells, primary_only=True) -> list[dict]:
    rows = []
    for c in cells:
        for e in c.metrics:
            if primary_only and not e.primary:
                continue
            rows.append({
                "algorithm": c.algorithm, "dataset": c.dataset, "epsilon": c.epsilon,
                "query": e.query, "repetition": c.repetition, "metric": e.metric, "value": e.value,
                "wall_s": c.wall_s, "peak_bytes": c.peak_bytes,
                "warnings": "|".join(list(e.warnings) + c.warnings),
            })
    return rows


# ---------------------------------------------------------------- aggregation

def aggregate_means(rows) -> list[dict]:
    """Mean and population sd per (algorithm, dataset, epsilon, query, metric)."""
    groups: dict = {}
    for r in rows:
        key = (r["algorithm"], r["dataset"], float(r["epsilon"]), r["query"], r["metric"])
        groups.setdefault(key, []).append(float(r["value"]))
    out = []
    for key in groups:
        v = np.asarray(groups[key])
        mean = float(v.mean()) if not np.isnan(v).any() else float("nan")
        sd = float(v.std(ddof=0)) if not np.isnan(v).any() else float("nan")
        out.append(dict(zip(("algorithm", "dataset", "epsilon", "query", "metric"), key),
                        mean=mean, sd=sd, n=int(v.size)))
    return out


@dataclass
class BestCountTable:
    algorithms: list
    datasets: list
    epsilons: list
    queries: list
    per_graph: dict        # (algorithm, dataset, epsilon) -> C_A(G, eps)
    per_query: dict        # (algorithm, query) -> C_A(Q_i)
    winners: dict          # (dataset, epsilon, query) -> tuple of credited algorithms


def _is_better(a, b, higher):
    return a > b if higher else a < b


def best_counts(aggregates, higher_is_better=None, tie_tol: float = TIE_TOL,
                unique_winner: bool = False, algorithms=None) -> BestCountTable:
    """Credit the best algorithm(s) per (dataset, epsilon, query).

    ``higher_is_better`` maps a metric name to its direction (default: the
    partition scores are higher-is-better, all errors lower). NaN ranks
    worst. Ties within ``tie_tol`` credit every tied algorithm unless
    ``unique_winner`` picks the first in algorithm order.
    """
    if higher_is_better is None:
        def higher_is_better(metric):
            return metric in HIGHER_IS_BETTER
    elif isinstance(higher_is_better, dict):
        table = dict(higher_is_better)

        def higher_is_better(metric):
            return table[metric]
    rows = list(aggregates)
    algs = list(algorithms) if algorithms is not None else list(dict.fromkeys(r["algorithm"] for r in rows))
    datasets = list(dict.fromkeys(r["dataset"] for r in rows))
    epsilons = sorted({float(r["epsilon"]) for r in rows})
    queries = list(dict.fromkeys(r["query"] for r in rows))
    cells: dict = {}
    for r in rows:
        key = (r["dataset"], float(r["epsilon"]), r["query"])
        cells.setdefault(key, {})[r["algorithm"]] = (r["metric"], float(r["mean"]))
    missing = [f"{a}@{k}" for k, v in sorted(cells.items()) for a in algs if a not in v]
    if missing:
        raise ValueError("incomplete coverage: " + ", ".join(missing))
    per_graph = {(a, d, e): 0 for a in algs for d in datasets for e in epsilons}
    per_query = {(a, q): 0 for a in algs for q in queries}
    winners = {}
    for key in sorted(cells, key=lambda k: (datasets.index(k[0]), k[1], queries.index(k[2]))):
        entry = cells[key]
        metric = entry[algs[0]][0]
        higher = bool(higher_is_better(metric))
        vals = {a: entry[a][1] for a in algs}
        finite = [v for v in vals.values() if not math.isnan(v)]
        if not finite:
            credited = list(algs)
        else:
            best = max(finite) if higher else min(finite)
            credited = [a for a in algs if not math.isnan(vals[a]) and abs(vals[a] - best) <= tie_tol]
        if unique_winner:
            credited = credited[:1]
        winners[key] = tuple(credited)
        d, e, q = key
        for a in credited:
            per_graph[(a, d, e)] += 1
            per_query[(a, q)] += 1
    return BestCountTable(algs, datasets, epsilons, queries, per_graph, per_query, winners)


def check_best_count_invariants(table: BestCountTable) -> list[str]:
    problems = []
    nq = len(table.queries)
    for (a, d, e), c in table.per_graph.items():
        if not 0 <= c <= nq:
            problems.append(f"C_{a}({d},{e})={c} outside [0, {nq}]")
    for d in table.datasets:
        for e in table.epsilons:
            s = sum(table.per_graph[(a, d, e)] for a in table.algorithms)
            if s < nq:
                problems.append(f"sum over algorithms for ({d},{e}) is {s} < {nq}")
    for k, w in table.winners.items():
        if len(w) < 1:
            problems.append(f"no credited algorithm for {k}")
    return problems


# ---------------------------------------------------------------- reports

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, columns, rows):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
    os.replace(tmp, path)


def versions() -> dict:
    import networkx
    import scipy

    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "networkx": networkx.__version__, "dpgraphgen": __version__, "kernel_backend": kernels.BACKEND}


REPORT_FILES = ("raw.csv", "aggregate.csv", "best_counts_graph.csv", "best_counts_query.csv",
                "long.csv", "manifest.json")


def write_report(cells, aggregates, table: BestCountTable, path, grid: ExperimentGrid | None = None,
                 extra: dict | None = None) -> dict:
    """Write the report files into directory ``path``; returns their paths."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    files = {name: out / name for name in REPORT_FILES}
    if cells is not None:
        _write_csv(files["raw.csv"], RAW_COLUMNS, metric_rows(cells, primary_only=True))
        _write_csv(files["long.csv"], RAW_COLUMNS, metric_rows(cells, primary_only=False))
    _write_csv(files["aggregate.csv"], ["algorithm", "dataset", "epsilon", "query", "metric", "mean", "sd", "n"],
               aggregates)
    # one row per (epsilon, algorithm), one column per dataset
    rows = []
    for e in table.epsilons:
        for a in table.algorithms:
            r = {"epsilon": e, "algorithm": a}
            r.update({d: table.per_graph[(a, d, e)] for d in table.datasets})
            rows.append(r)
    _write_csv(files["best_counts_graph.csv"], ["epsilon", "algorithm"] + list(table.datasets), rows)
    # per-query layout: algorithms x queries, summed over datasets and epsilons
    rows = []
    for a in table.algorithms:
        r = {"algorithm": a}
        r.update({q: table.per_query[(a, q)] for q in table.queries})
        rows.append(r)
    _write_csv(files["best_counts_query.csv"], ["algorithm"] + list(table.queries), rows)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "grid": grid.to_dict() if grid is not None else None,
        "primary_metrics": {q.label: PRIMARY_METRIC[q] for q in QueryId},
        "ledger_defaults": LEDGER_TEMPLATES,
        "tie_rule": f"all algorithms within {TIE_TOL} of the best are credited",
        "memory_method": MEMORY_METHOD,
        "path_queries": {"exact_limit": EXACT_PATH_LIMIT, "sampled_sources": SAMPLED_SOURCES},
        "versions": versions(),
        "files": [f for f in REPORT_FILES if files[f].exists() or f == "manifest.json"],
    }
    if cells is not None:
        manifest["cells"] = [
            {"algorithm": c.algorithm, "dataset": c.dataset, "epsilon": c.epsilon, "repetition": c.repetition,
             "seed": c.seed, "status": c.status, "n": c.output_n, "m": c.output_m, "ledger": c.ledger,
             "warnings": c.warnings}
            for c in cells
        ]
    if extra:
        manifest.update(_jsonable(extra))
    tmp = f"{files['manifest.json']}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=False, default=str)
        fh.write("\n")
    os.replace(tmp, files["manifest.json"])
    return files


def read_raw_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["epsilon"] = float(r["epsilon"])
        r["value"] = float(r["value"])
        r["repetition"] = int(r["repetition"])
    return rows


def summarize(table: BestCountTable) -> str:
    """Plain-text best-count summary, one row per (epsilon, algorithm)."""
    lines = []
    head = f"{'eps':>6}  {'algorithm':<10}" + "".join(f"{d:>14}" for d in table.datasets)
    lines.append(head)
    for e in table.epsilons:
        for a in table.algorithms:
            lines.append(f"{e:>6g}  {a:<10}" + "".join(f"{table.per_graph[(a, d, e)]:>14d}"
                                                      for d in table.datasets))
    return "\n".join(lines)


# ---------------------------------------------------------------- config

@dataclass
class RunConfig:
    grid: ExperimentGrid
    output_dir: str
    workers: int = 1
    log_level: str = "INFO"
    track_memory: bool = True


def config_from_dict(doc: dict, base_dir=None, overrides: dict | None = None) -> RunConfig:
    """Validate a config mapping; all problems are reported together."""
    doc = dict(doc or {})
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    problems = []
    algs = doc.get("algorithms", list(ALGORITHMS))
    if isinstance(algs, str):
        algs = list(ALGORITHMS) if algs == "all" else [algs]
    resolved = []
    from .synth import resolve_algorithm
    for a in algs:
        try:
            resolved.append(resolve_algorithm(a))
        except ConfigError as exc:
            problems.append(str(exc))
    qs = doc.get("queries", "all")
    if qs == "all":
        qs = list(QueryId)
    queries = []
    for q in qs:
        try:
            queries.append(resolve_query(q))
        except ValueError as exc:
            problems.append(str(exc))
    datasets = []
    for d in doc.get("datasets", []) or []:
        if isinstance(d, str):
            d = {"name": d}
        try:
            desc = descriptor_from_dict(d)
        except (KeyError, ValueError) as exc:
            problems.append(f"dataset {d}: {exc}")
            continue
        if not desc.is_builtin:
            from .datasets import resolve_path
            if not resolve_path(desc.source, base_dir).exists():
                problems.append(f"dataset {desc.name}: file {desc.source} not found")
        datasets.append(desc)
    if not datasets:
        problems.append("no datasets configured")
    epsilons = doc.get("epsilons", list(DEFAULT_EPSILONS))
    try:
        epsilons = [float(e) for e in epsilons]
        if any(not (e > 0 and math.isfinite(e)) for e in epsilons):
            problems.append("every epsilon must be positive and finite")
    except (TypeError, ValueError):
        problems.append(f"invalid epsilons {epsilons!r}")
        epsilons = []
    delta = float(doc.get("delta", DEFAULT_DELTA))
    if not 0 <= delta < 1:
        problems.append("delta must lie in [0, 1)")
    if delta == 0 and any(a in NEEDS_DELTA for a in resolved):
        problems.append(f"delta > 0 is required for {', '.join(a for a in resolved if a in NEEDS_DELTA)}")
    alg_cfg = {}
    for name, cfg in (doc.get("algorithm_config") or {}).items():
        try:
            key = resolve_algorithm(name)
        except ConfigError as exc:
            problems.append(str(exc))
            continue
        cfg = dict(cfg or {})
        shares = cfg.get("shares")
        if shares is not None:
            try:
                total = sum(float(s) for s in shares)
                if abs(total - 1.0) > 1e-9 or any(float(s) <= 0 for s in shares):
                    problems.append(f"{key}: budget fractions {shares} must be positive and sum to 1")
                elif key in LEDGER_TEMPLATES and len(shares) != len(LEDGER_TEMPLATES[key]):
                    problems.append(f"{key}: expected {len(LEDGER_TEMPLATES[key])} budget fractions")
            except (TypeError, ValueError):
                problems.append(f"{key}: invalid budget fractions {shares!r}")
        alg_cfg[key] = cfg
    reps = doc.get("repetitions", DEFAULT_REPETITIONS)
    workers = doc.get("workers", 1)
    try:
        reps = int(reps)
        workers = int(workers)
        if reps < 1:
            problems.append("repetitions must be positive")
        if workers < 1:
            problems.append("workers must be positive")
    except (TypeError, ValueError):
        problems.append("repetitions and workers must be integers")
    if problems:
        raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(problems))
    grid = ExperimentGrid(resolved, datasets, epsilons, queries, reps, int(doc.get("seed", 0)), delta,
                          alg_cfg, str(base_dir) if base_dir is not None else None)
    out = doc.get("output_dir") or os.environ.get("DPGRAPHGEN_OUTPUT_DIR") or "reports"
    return RunConfig(grid, str(out), workers, str(doc.get("log_level", "INFO")),
                     bool(doc.get("track_memory", True)))


def load_config(path, overrides: dict | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return config_from_dict(doc, Path(path).resolve().parent, overrides)


def run_and_report(cfg: RunConfig, progress=None):
    cells = run_grid(cfg.grid, cfg.workers, cfg.track_memory, progress)
    rows = metric_rows(cells)
    agg = aggregate_means(rows)
    table = best_counts(agg, algorithms=cfg.grid.algorithm_names)
    problems = check_best_count_invariants(table)
    files = write_report(cells, agg, table, cfg.output_dir, cfg.grid,
                         {"workers": cfg.workers, "invariant_problems": problems,
                          "argv": sys.argv[1:]})
    return cells, agg, table, files
