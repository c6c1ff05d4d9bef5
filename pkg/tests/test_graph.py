import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpgraphgen.graph import (EdgeListError, Graph, degree_sequence, density, generate_ba, generate_er,
                              index_from_pair, load_edge_list, pair_from_index, read_canonical,
                              write_edge_list)

from conftest import random_graph


def test_load_dedups_and_drops_loops(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n1 2\n1 0\n2 2\n")
    g = load_edge_list(p)
    assert (g.n, g.m) == (3, 2)


def test_load_relabels_in_first_appearance_order(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# comment\n10\t30\n30   7\n")
    mapping = tmp_path / "map.txt"
    g = load_edge_list(p, mapping_path=mapping)
    assert g.edge_set() == {(0, 1), (1, 2)}
    rows = [ln.split() for ln in mapping.read_text().splitlines() if not ln.startswith("#")]
    assert rows == [["10", "0"], ["30", "1"], ["7", "2"]]


def test_load_errors(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(EdgeListError):
        load_edge_list(empty)
    bad = tmp_path / "b.txt"
    bad.write_text("0 1\n1 x\n")
    with pytest.raises(EdgeListError, match=r"b.txt:2:"):
        load_edge_list(bad)


def test_canonical_round_trip_is_bit_exact(tmp_path):
    g = random_graph(30, 0.2, 1)
    g = Graph(g.n + 2, g.edges)       # trailing isolated nodes
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_edge_list(g, a)
    h = read_canonical(a)
    write_edge_list(h, b)
    assert h == g
    assert a.read_bytes() == b.read_bytes()


def test_degree_and_density(k4):
    assert degree_sequence(k4).tolist() == [3, 3, 3, 3]
    assert degree_sequence(Graph.path(3)).tolist() == [1, 2, 1]
    assert density(k4) == 0.75
    assert density(Graph(10)) == 0.0


def test_er_examples():
    assert generate_er(4, 6, 0) == Graph.complete(4)
    assert generate_er(5, 0, 0).m == 0
    with pytest.raises(ValueError):
        generate_er(4, 7, 0)


def test_er_mean_edge_count():
    ms = [generate_er(2000, 20000, s).m for s in range(10)]
    assert abs(np.mean(ms) - 20000) < 0.01 * 20000


def test_ba_examples():
    g = generate_ba(3, 1, 0)
    assert g.m == 2
    g = generate_ba(2000, 5, 3)
    assert g.m == 5 * (2000 - 5)
    hist = np.bincount(g.degrees)
    ks = np.nonzero(hist)[0]
    from scipy.stats import spearmanr
    assert spearmanr(ks, hist[ks]).statistic < 0
    with pytest.raises(ValueError):
        generate_ba(5, 5, 0)


def test_generators_deterministic():
    assert generate_er(300, 900, 5) == generate_er(300, 900, 5)
    assert generate_ba(300, 3, 5) == generate_ba(300, 3, 5)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_graph_invariants(n, p, seed):
    g = random_graph(n, p, seed)
    e = g.edges
    assert g.degrees.sum() == 2 * g.m
    if g.m:
        assert (e[:, 0] < e[:, 1]).all() and e.max() <= n - 1
        assert len({tuple(x) for x in e.tolist()}) == g.m


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 200), st.data())
def test_pair_index_bijection(n, data):
    total = n * (n - 1) // 2
    codes = np.array(data.draw(st.lists(st.integers(0, total - 1), min_size=1, max_size=20)))
    pr = pair_from_index(codes, n)
    assert (pr[:, 0] < pr[:, 1]).all()
    assert (index_from_pair(pr[:, 0], pr[:, 1], n) == codes).all()


def test_constructor_normalizes_input():
    g = Graph(4, [(1, 0), (0, 1), (2, 2), (3, 2)])
    assert g.edge_set() == {(0, 1), (2, 3)}
