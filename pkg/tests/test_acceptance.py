"""Acceptance checks, one test per criterion.

Each test records a ``criterion`` and a ``detail`` property; the terminal
summary hook in conftest prints one PASS/FAIL line per criterion.
"""

import csv
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from sklearn.metrics import adjusted_mutual_info_score

from dpgraphgen import harness, metrics
from dpgraphgen.community import louvain
from dpgraphgen.construct import joint_degree_matrix
from dpgraphgen.datasets import load_builtin, planted_partition, resolve_path
from dpgraphgen.graph import load_edge_list
from dpgraphgen.privacy import PrivacyBudget, exponential_select, laplace_noise
from dpgraphgen.queries import QueryError, QueryId, evaluate
from dpgraphgen.synth import generate

import oracles
from conftest import brute_triangles, dense, random_graph

ROOT = Path(__file__).resolve().parents[1]
HIGHER = {"NMI", "ARI", "AMI", "Avg-F1"}


def _note(record_property, number, title, detail):
    record_property("criterion", f"{number}. {title}")
    record_property("detail", detail)


# ---------------------------------------------------------------- 1

def _evaluate_or_none(q, g):
    try:
        return evaluate(q, g, 0)
    except QueryError:
        return None


def _local_move_gain(g, labels):
    """Largest modularity gain from moving one node to another or a new community."""
    a = dense(g).astype(np.float64)
    k = a.sum(axis=1)
    m = g.m
    b = a - np.outer(k, k) / (2.0 * m)
    onehot = np.eye(labels.max() + 1)[labels]
    best = -np.inf
    for i in range(g.n):
        s = b[i] @ onehot
        s[labels[i]] -= b[i, i]
        # dQ(i: a -> c) = (s_c - s_a) / m; a fresh singleton has s = 0
        gains = np.append(s, 0.0) - s[labels[i]]
        gains[labels[i]] = 0.0
        best = max(best, float(gains.max()) / m)
    return best


def _check_graph(g):
    """Compare every query with its brute-force oracle; return mismatching query names."""
    bad = []
    deg = dense(g).sum(axis=1)
    dist = oracles.distance_stats(g)
    got = {q: _evaluate_or_none(q, g) for q in QueryId}

    def scalar(q, want, exact=False):
        v = got[q]
        if want is None:
            ok = v is None
        elif v is None:
            ok = False
        elif exact:
            ok = v.value == want
        else:
            ok = abs(v.value - want) <= 1e-9
        if not ok:
            bad.append(q.name)

    def vector(q, want):
        v = got[q]
        if want is None:
            ok = v is None
        else:
            ok = v is not None and v.value.shape == want.shape and np.allclose(v.value, want, rtol=0, atol=1e-9)
        if not ok:
            bad.append(q.name)

    scalar(QueryId.Q1, g.n, exact=True)
    scalar(QueryId.Q2, int(deg.sum()) // 2, exact=True)
    scalar(QueryId.Q3, brute_triangles(g), exact=True)
    scalar(QueryId.Q4, deg.mean())
    scalar(QueryId.Q5, ((deg - deg.mean()) ** 2).mean())
    vector(QueryId.Q6, oracles.degree_distribution(g))
    scalar(QueryId.Q7, None if dist is None else dist[0], exact=True)
    scalar(QueryId.Q8, None if dist is None else dist[1])
    vector(QueryId.Q9, None if dist is None else dist[2])
    scalar(QueryId.Q10, oracles.gcc(g))
    scalar(QueryId.Q11, oracles.acc(g))

    labels = got[QueryId.Q12].value
    valid = labels.shape == (g.n,) and set(labels.tolist()) == set(range(labels.max() + 1))
    if not valid or (g.m > 0 and _local_move_gain(g, labels) > 1e-9):
        bad.append("Q12")
    scalar(QueryId.Q13, oracles.modularity(g, labels) if g.m else None)
    scalar(QueryId.Q14, oracles.assortativity(g) if g.m else None)

    v = got[QueryId.Q15]
    if g.m == 0:
        if v is not None:
            bad.append("Q15")
    else:
        want = oracles.eigenvector(g)
        cos = v.value @ want / (np.linalg.norm(v.value) * np.linalg.norm(want)) if v is not None else 0.0
        if not 1 - cos <= 1e-6:
            bad.append("Q15")
    return bad


def test_criterion_1_query_oracles(record_property):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    failures = {}
    for i in range(50):
        n = int(rng.integers(5, 51))
        p = float(rng.choice([0.03, 0.08, 0.15, 0.3, 0.5, 0.8]))
        g = random_graph(n, p, 1000 + i)
        bad = _check_graph(g)
        if bad:
            failures[(n, p, 1000 + i)] = bad
    elapsed = time.perf_counter() - t0
    _note(record_property, 1, "query-oracle suite", f"50 graphs, {len(failures)} with mismatches, {elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 60


# ---------------------------------------------------------------- 2

def test_criterion_2_mechanism_statistics(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    x = laplace_noise(1.0, 1.0, rng, size=100_000)
    mean, var = float(x.mean()), float(x.var())

    scores = np.array([0.0, 1.0, 2.0, 3.0])
    eps, dq = 1.0, 1.0
    w = np.exp(eps * scores / (2 * dq))
    closed = w / w.sum()
    draws = [exponential_select(range(4), scores, dq, eps, rng) for _ in range(100_000)]
    freq = np.bincount(draws, minlength=4) / len(draws)
    gap = float(np.abs(freq - closed).max())
    elapsed = time.perf_counter() - t0
    _note(record_property, 2, "mechanism statistics",
          f"laplace mean {mean:+.4f} var {var:.4f}; exp-mech max |freq-p| {gap:.4f}; {elapsed:.1f}s")
    assert abs(mean) <= 0.02
    assert abs(var - 2.0) <= 0.05 * 2.0
    assert gap <= 0.02
    assert elapsed < 30


# ---------------------------------------------------------------- 3

def test_criterion_3_zero_noise_fidelity(record_property):
    budget = PrivacyBudget(1e6, 0.01)
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    tmf_exact = dgg_ok = dk_ok = 0
    for i in range(20):
        g = random_graph(int(rng.integers(20, 201)), float(rng.uniform(0.02, 0.3)), 3000 + i)
        tmf_exact += generate("TmF", g, budget, i).output == g
        rec = generate("DGG", g, budget, i)
        dgg_ok += np.array_equal(np.asarray(rec.summaries["degrees"]), g.degrees)
        out = generate("DP-dK", g, budget, i, {"mode": "dk1"}).output
        dk_ok += np.array_equal(np.bincount(out.degrees, minlength=g.n + 1),
                                np.bincount(g.degrees, minlength=g.n + 1))
    elapsed = time.perf_counter() - t0
    _note(record_property, 3, "zero-noise fidelity",
          f"TmF exact {tmf_exact}/20, DGG degrees {dgg_ok}/20, DP-dK dK-1 histogram {dk_ok}/20, {elapsed:.1f}s")
    assert tmf_exact >= 19
    assert dgg_ok == 20
    assert dk_ok == 20
    assert elapsed < 120


# ---------------------------------------------------------------- 4

def _grqc_path():
    for name in ("CA-GrQC.txt", "ca-GrQC.txt"):
        p = resolve_path(name)
        if p.exists():
            return p
    return None


def test_criterion_4_dpdk_verification(record_property):
    path = _grqc_path()
    if path is not None:
        g = load_edge_list(path)
        outs = [generate("DP-dK", g, PrivacyBudget(20.0, 0.01), s).output for s in range(10)]
        mean_m = float(np.mean([o.m for o in outs]))
        mean_d = float(np.mean([2.0 * o.m / o.n for o in outs]))
        _note(record_property, 4, "DP-dK verification (CA-GrQC)",
              f"mean |E| {mean_m:.1f} vs 14484, mean degree {mean_d:.3f} vs 5.527")
        assert abs(mean_m - 14484) <= 0.05 * 14484
        assert abs(mean_d - 5.527) <= 0.05 * 5.527
        return
    g = load_builtin("ba10k")
    out = generate("DP-dK", g, PrivacyBudget(1e6, 0.01), 4).output
    l1 = joint_degree_matrix(out).l1(joint_degree_matrix(g))
    _note(record_property, 4, "DP-dK verification (substitute: ba10k dK-2 round trip)",
          f"CA-GrQC not found; JDM L1 {l1:.0f} vs limit {0.05 * g.m:.0f} (m={g.m})")
    assert l1 <= 0.05 * g.m


# ---------------------------------------------------------------- 5 and 6

@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    runs = []
    for k in range(2):
        out = tmp_path_factory.mktemp(f"desk{k}")
        cfg = harness.load_config(ROOT / "configs" / "desk.yaml", {"output_dir": str(out)})
        t0 = time.perf_counter()
        cells, agg, table, files = harness.run_and_report(cfg)
        runs.append({"dir": out, "cells": cells, "agg": agg, "table": table, "files": files,
                     "elapsed": time.perf_counter() - t0, "workers": cfg.workers})
    return runs


def _winners_from_aggregate(path, tol):
    cells = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            cells.setdefault((r["dataset"], float(r["epsilon"]), r["query"]), []).append(
                (r["algorithm"], r["metric"], float(r["mean"])))
    out = {}
    for key, entries in cells.items():
        metric = entries[0][1]
        vals = [v for _, _, v in entries if not math.isnan(v)]
        if not vals:
            out[key] = {a for a, _, _ in entries}
            continue
        best = max(vals) if metric in HIGHER else min(vals)
        out[key] = {a for a, _, v in entries if not math.isnan(v) and abs(v - best) <= tol}
    return out


def test_criterion_5_desk_grid(desk_runs, record_property):
    run = desk_runs[0]
    table = run["table"]
    problems = harness.check_best_count_invariants(table)
    artifacts = ["raw.csv", "aggregate.csv", "best_counts_graph.csv", "best_counts_query.csv", "manifest.json"]
    missing = [f for f in artifacts if not (run["dir"] / f).exists()]

    # tie credit: winners recomputed from the aggregate file
    ref = _winners_from_aggregate(run["dir"] / "aggregate.csv", harness.TIE_TOL)
    tie_mismatch = [k for k in ref if set(table.winners[k]) != ref[k]]
    counts = {(a, d, e): sum(a in w for (dd, ee, _), w in ref.items() if (dd, ee) == (d, e))
              for (a, d, e) in table.per_graph}
    count_mismatch = [k for k in counts if counts[k] != table.per_graph[k]]

    # direction consistency: negating values and flipping every direction keeps the winners
    flipped = [dict(r, mean=-r["mean"]) for r in run["agg"]]
    t2 = harness.best_counts(flipped, higher_is_better=lambda m: m not in HIGHER)
    direction_mismatch = [k for k in table.winners if table.winners[k] != t2.winners[k]]

    failed = sum(c.status != "ok" for c in run["cells"])
    _note(record_property, 5, "desk-scale grid",
          f"{len(run['cells'])} syntheses ({failed} failed) in {run['elapsed'] / 60:.1f} min "
          f"on {os.cpu_count()} core(s), workers={run['workers']}; missing artifacts {missing}; "
          f"invariant problems {len(problems)}, tie mismatches {len(tie_mismatch) + len(count_mismatch)}, "
          f"direction mismatches {len(direction_mismatch)}")
    assert len(run["cells"]) == 6 * 2 * 3 * 3
    assert len(table.queries) == 15
    assert run["elapsed"] < 30 * 60
    assert not missing
    assert not problems, problems
    assert not tie_mismatch and not count_mismatch
    assert not direction_mismatch


def _strip_resources(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [i for i, c in enumerate(rows[0]) if c not in harness.RESOURCE_COLUMNS]
    return [[r[i] for i in keep] for r in rows]


def test_criterion_6_determinism(desk_runs, record_property):
    a, b = desk_runs
    same = {f: _strip_resources(a["dir"] / f) == _strip_resources(b["dir"] / f)
            for f in ("raw.csv", "aggregate.csv")}
    _note(record_property, 6, "determinism",
          ", ".join(f"{f} {'identical' if ok else 'DIFFERENT'}" for f, ok in same.items())
          + " (wall_s/peak_bytes excluded)")
    assert all(same.values())


# ---------------------------------------------------------------- 7

def _distribution(rng):
    p = rng.random(int(rng.integers(1, 12))) * (rng.random() < 0.8)
    p[rng.integers(0, p.size)] += 1e-3
    return p / p.sum()


def _partition(rng, n):
    return rng.integers(0, int(rng.integers(1, n + 1)), size=n)


def test_criterion_7_metric_properties(record_property):
    rng = np.random.default_rng(707)
    violations = []
    calls = 0

    def check(name, value, cond=True):
        nonlocal calls
        calls += 1
        if not (metrics.check_range(name, value) and cond):
            violations.append((name, value))

    while calls < 1000:
        kind = calls % 4
        if kind == 0:
            t, s = rng.normal(0, 10, 2) * (rng.random(2) < 0.9)
            check("RE", metrics.relative_error(t, s))
            check("RE", metrics.relative_error(t, t), metrics.relative_error(t, t) == 0)
            a, b = rng.random(6), rng.random(6)
            check("MRE", metrics.mean_relative_error(a, b))
            check("MRE", metrics.mean_relative_error(a, a), metrics.mean_relative_error(a, a) == 0)
        elif kind == 1:
            p, q = _distribution(rng), _distribution(rng)
            check("KL", metrics.kl_divergence(p, q))
            check("KL", metrics.kl_divergence(p, p), abs(metrics.kl_divergence(p, p)) <= 1e-9)
            for name, fn in (("HD", metrics.hellinger), ("KS", metrics.ks_statistic)):
                v = fn(p, q)
                check(name, v, abs(v - fn(q, p)) <= 1e-12)
                check(name, fn(p, p), fn(p, p) <= 1e-12)
        elif kind == 2:
            a, b = rng.random(int(rng.integers(1, 20))), rng.random(int(rng.integers(1, 20)))
            for name, fn in (("MAE", metrics.mae), ("MSE", metrics.mse)):
                v = fn(a, b)
                check(name, v, abs(v - fn(b, a)) <= 1e-12)
                check(name, fn(a, a), fn(a, a) == 0)
        else:
            n = int(rng.integers(2, 40))
            a, b = _partition(rng, n), _partition(rng, n)
            for name, fn in (("NMI", metrics.nmi), ("ARI", metrics.ari), ("AMI", metrics.ami),
                             ("Avg-F1", metrics.avg_f1)):
                v = fn(a, b)
                check(name, v, abs(v - fn(b, a)) <= 1e-9)
                check(name, fn(a, a), abs(fn(a, a) - 1) <= 1e-9)
            # independent cross-check of one chance-corrected score
            ref = max(0.0, adjusted_mutual_info_score(a, b))
            check("AMI", metrics.ami(a, b), abs(metrics.ami(a, b) - ref) <= 1e-7)
    _note(record_property, 7, "metric property suite", f"{calls} invocations, {len(violations)} violations")
    assert calls >= 1000
    assert not violations, violations[:10]


# ---------------------------------------------------------------- 8

def test_criterion_8_structural_preservation(record_property):
    g = load_builtin("twoclique300")
    truth = planted_partition(g.n)
    means = {}
    for alg in ("PrivGraph", "PrivHRG"):
        scores = [metrics.nmi(truth, louvain(generate(alg, g, PrivacyBudget(10.0), s).output, seed=0))
                  for s in range(10)]
        means[alg] = float(np.mean(scores))
    _note(record_property, 8, "structural preservation",
          ", ".join(f"{a} mean NMI {v:.3f}" for a, v in means.items()) + " (10 runs, eps=10)")
    assert all(v >= 0.8 for v in means.values()), means
