import itertools

import numpy as np
import pytest

from dpgraphgen.graph import Graph


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph(n, np.column_stack((iu[keep], ju[keep])))


def dense(g):
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.edges.tolist():
        a[u, v] = a[v, u] = 1
    return a


def brute_triangles(g):
    a = dense(g)
    return sum(1 for i, j, k in itertools.combinations(range(g.n), 3) if a[i, j] and a[j, k] and a[i, k])


def brute_distances(g):
    """All-pairs BFS with plain lists; returns the n x n matrix, -1 when unreachable."""
    adj = [[] for _ in range(g.n)]
    for u, v in g.edges.tolist():
        adj[u].append(v)
        adj[v].append(u)
    out = np.full((g.n, g.n), -1, dtype=np.int64)
    for s in range(g.n):
        out[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if out[s, v] < 0:
                        out[s, v] = out[s, u] + 1
                        nxt.append(v)
            frontier = nxt
    return out


def brute_components(g):
    d = brute_distances(g)
    seen, comps = set(), []
    for s in range(g.n):
        if s in seen:
            continue
        c = [v for v in range(g.n) if d[s, v] >= 0]
        seen.update(c)
        comps.append(c)
    return comps


def two_cliques(k, bridge=True):
    a = list(itertools.combinations(range(k), 2))
    b = [(u + k, v + k) for u, v in a]
    edges = a + b + ([(0, k)] if bridge else [])
    return Graph(2 * k, edges)


@pytest.fixture
def k4():
    return Graph.complete(4)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and getattr(rep, "when", "call") == "call":
                lines.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL", props["detail"]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status, detail in sorted(lines, key=lambda x: int(x[0].split(".")[0])):
            terminalreporter.write_line(f"{status}  {name}: {detail}")
