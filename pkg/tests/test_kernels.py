"""Compiled and pure-Python kernels must agree exactly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpgraphgen import kernels
from dpgraphgen.datasets import load_builtin
from dpgraphgen.synth.privhrg import sample_dendrogram

from conftest import brute_distances, brute_triangles, random_graph

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernels not built")


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 2**31))
def test_triangles_and_bfs_vs_oracles(name, n, p, seed):
    k = BACKENDS[name]
    g = random_graph(n, p, seed)
    indptr, indices = g.csr
    assert k.triangles_per_node(indptr, indices).sum() == 3 * brute_triangles(g)
    hist, ecc = k.bfs_distance_counts(indptr, indices, np.arange(n, dtype=np.int64))
    d = brute_distances(g)
    want = np.bincount(d[d > 0].ravel(), minlength=1) if (d > 0).any() else np.zeros(1, dtype=np.int64)
    assert np.asarray(hist)[1:].tolist() == want[1:].tolist()
    assert np.asarray(ecc).tolist() == d.max(axis=1).clip(0).tolist()


@compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.floats(0, 1), st.integers(0, 2**31))
def test_simple_kernel_parity(n, p, seed):
    c, py = BACKENDS["compiled"], BACKENDS["python"]
    g = random_graph(n, p, seed)
    indptr, indices = g.csr
    assert (c.triangles_per_node(indptr, indices) == py.triangles_per_node(indptr, indices)).all()
    assert c.max_common_neighbors(indptr, indices) == py.max_common_neighbors(indptr, indices)
    src = np.arange(n, dtype=np.int64)
    for a, b in zip(c.bfs_distance_counts(indptr, indices, src), py.bfs_distance_counts(indptr, indices, src)):
        assert np.array_equal(a, b)


@compiled
@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("graph", ["random", "twoclique"])
def test_hrg_mcmc_parity(seed, graph):
    g = random_graph(40, 0.15, seed) if graph == "random" else load_builtin("twoclique300", n=40)
    runs = []
    for name in ("compiled", "python"):
        d, e, info = sample_dendrogram(g, 5.0, np.random.default_rng(seed), max_steps=4000,
                                       backend=BACKENDS[name])
        runs.append((d, e, info))
    (d1, e1, i1), (d2, e2, i2) = runs
    assert np.array_equal(d1.left, d2.left) and np.array_equal(d1.right, d2.right)
    assert np.array_equal(e1, e2)
    assert i1["loglik"] == i2["loglik"] and i1["steps"] == i2["steps"]
    assert np.array_equal(i1["trace"], i2["trace"])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_hrg_bookkeeping_matches_recount(name):
    k = BACKENDS[name]
    g = random_graph(30, 0.2, 9)
    d, e, info = sample_dendrogram(g, 3.0, np.random.default_rng(4), max_steps=3000, backend=k)
    e2 = k.hrg_edge_counts(np.ascontiguousarray(g.edges[:, 0]), np.ascontiguousarray(g.edges[:, 1]),
                           d.parent, d.depths(), 2 * g.n - 1)
    assert np.array_equal(np.asarray(e2), e)
    size = d.sizes()
    assert k.hrg_loglik(e, d.left, d.right, size, g.n) == pytest.approx(info["loglik"], abs=1e-7)
    # tree stays a valid binary tree over all leaves
    order, _, _ = d.leaf_ranges()
    assert sorted(order.tolist()) == list(range(g.n))
