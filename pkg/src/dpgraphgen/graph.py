"""Undirected simple graphs, edge-list IO and the ER/BA generators."""

from __future__ import annotations

import os
from functools import cached_property

import numpy as np


class EdgeListError(ValueError):
    """Malformed or empty edge-list file."""


class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    Edges are stored once as ``(u, v)`` with ``u < v``, sorted
    lexicographically. The CSR adjacency (sorted neighbour lists) and the
    degree vector are derived lazily and cached.
    """

    __slots__ = ("n", "edges", "__dict__")

    def __init__(self, n: int, edges=None):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be non-negative")
        if edges is None:
            arr = np.empty((0, 2), dtype=np.int64)
        else:
            arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("edge endpoint outside 0..n-1")
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            keep = lo != hi
            codes = np.unique(lo[keep] * n + hi[keep])
            arr = np.column_stack((codes // n, codes % n)) if codes.size else np.empty((0, 2), np.int64)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        self.n = n
        self.edges = arr

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` with each neighbour list sorted."""
        n = self.n
        if self.m == 0:
            indptr = np.zeros(n + 1, dtype=np.int64)
            indices = np.empty(0, dtype=np.int64)
        else:
            src = np.concatenate((self.edges[:, 0], self.edges[:, 1]))
            dst = np.concatenate((self.edges[:, 1], self.edges[:, 0]))
            order = np.lexsort((dst, src))
            indices = np.ascontiguousarray(dst[order])
            counts = np.bincount(src, minlength=n)
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return indptr, indices

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)
        d.setflags(write=False)
        return d

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[u]:indptr[u + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def adjacency_matrix(self, dtype=np.float64):
        """Sparse CSR adjacency matrix."""
        from scipy import sparse

        indptr, indices = self.csr
        data = np.ones(indices.shape[0], dtype=dtype)
        return sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def subgraph(self, nodes) -> tuple["Graph", np.ndarray]:
        """Induced subgraph relabelled to ``0..k-1``; also returns the old IDs."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(nodes.size)
        e = remap[self.edges]
        e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
        return Graph(nodes.size, e), nodes

    @classmethod
    def complete(cls, n: int) -> "Graph":
        iu, ju = np.triu_indices(n, k=1)
        return cls(n, np.column_stack((iu, ju)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        a = np.arange(n - 1)
        return cls(n, np.column_stack((a, a + 1)))

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        a = np.arange(1, leaves + 1)
        return cls(leaves + 1, np.column_stack((np.zeros_like(a), a)))


def degree_sequence(g: Graph) -> np.ndarray:
    """Node degrees indexed by node ID."""
    return np.array(g.degrees, dtype=np.int64)


def density(g: Graph) -> float:
    """``2m / n^2``."""
    if g.n < 1:
        raise ValueError("density needs at least one node")
    return 2.0 * g.m / (g.n * g.n)


def connected_components(g: Graph) -> np.ndarray:
    """Component label per node (labels ordered by smallest member)."""
    from scipy.sparse.csgraph import connected_components as cc

    if g.n == 0:
        return np.empty(0, dtype=np.int64)
    _, labels = cc(g.adjacency_matrix(), directed=False)
    return labels.astype(np.int64)


def largest_component(g: Graph) -> np.ndarray:
    """Sorted node IDs of the largest connected component (lowest label wins ties)."""
    labels = connected_components(g)
    if labels.size == 0:
        return labels
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def load_edge_list(path, mapping_path=None) -> Graph:
    """Read a whitespace-separated edge list with ``#`` comments.

    Node IDs are relabelled to ``0..n-1`` in order of first appearance.
    Self-loops, duplicates and reversed duplicates are dropped. When
    ``mapping_path`` is given, the ``original new`` ID pairs are written
    there.
    """
    ids: dict[str, int] = {}
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#") or s.startswith("%"):
                continue
            tok = s.split()
            if len(tok) < 2:
                raise EdgeListError(f"{path}:{lineno}: expected two node IDs, got {s!r}")
            a, b = tok[0], tok[1]
            try:
                int(a)
                int(b)
            except ValueError:
                raise EdgeListError(f"{path}:{lineno}: non-integer node ID in {s!r}") from None
            a, b = str(int(a)), str(int(b))
            ia = ids.setdefault(a, len(ids))
            ib = ids.setdefault(b, len(ids))
            pairs.append((ia, ib))
    if not ids:
        raise EdgeListError(f"{path}: no edges found")
    if mapping_path is not None:
        with open(mapping_path, "w", encoding="utf-8") as fh:
            fh.write("# original new\n")
            for orig, new in ids.items():
                fh.write(f"{orig} {new}\n")
    return Graph(len(ids), np.asarray(pairs, dtype=np.int64))


def write_edge_list(g: Graph, path, header: bool = True) -> None:
    """Canonical dump: one ``u v`` line per edge, ``u < v``, sorted.

    The header records ``n`` so isolated trailing nodes survive a round trip
    through :func:`read_canonical`.
    """
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# nodes: {g.n} edges: {g.m}\n")
        for u, v in g.edges.tolist():
            fh.write(f"{u} {v}\n")
    os.replace(tmp, path)


def read_canonical(path) -> Graph:
    """Read a canonical dump produced by :func:`write_edge_list` without relabelling."""
    n = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                tok = s.lstrip("#").split()
                if len(tok) >= 2 and tok[0] == "nodes:":
                    n = int(tok[1])
                continue
            a, b = s.split()[:2]
            rows.append((int(a), int(b)))
    edges = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    return Graph(n, edges)


def generate_er(n: int, m_target: int, seed) -> Graph:
    """G(n, p) with ``p = 2 m_target / (n (n - 1))``."""
    max_m = n * (n - 1) // 2
    if not 0 <= m_target <= max_m:
        raise ValueError(f"m_target must lie in [0, {max_m}]")
    rng = np.random.default_rng(seed)
    if m_target == 0:
        return Graph(n)
    p = m_target / max_m
    k = int(rng.binomial(max_m, p))
    codes = rng.choice(max_m, size=k, replace=False)
    return Graph(n, pair_from_index(codes, n))


def generate_ba(n: int, m_per_node: int, seed) -> Graph:
    """Barabasi-Albert preferential attachment with a repeated-endpoint urn.

    The first ``m_per_node`` nodes form the seed set; every later node
    attaches to ``m_per_node`` distinct earlier nodes drawn with probability
    proportional to degree (seed nodes are uniform until they gain edges).
    """
    if not 1 <= m_per_node < n:
        raise ValueError("need 1 <= m_per_node < n")
    rng = np.random.default_rng(seed)
    urn = np.empty(2 * m_per_node * n + m_per_node, dtype=np.int64)
    size = 0
    edges = []
    targets = list(range(m_per_node))
    for v in range(m_per_node, n):
        for t in targets:
            edges.append((v, t))
        urn[size:size + m_per_node] = targets
        size += m_per_node
        urn[size:size + m_per_node] = v
        size += m_per_node
        chosen: set[int] = set()
        while len(chosen) < m_per_node:
            chosen.add(int(urn[rng.integers(size)]))
        targets = sorted(chosen)
    return Graph(n, np.asarray(edges, dtype=np.int64))


def pair_from_index(codes, n: int) -> np.ndarray:
    """Map linear indices over the strict upper triangle (row-major) to pairs."""
    codes = np.asarray(codes, dtype=np.int64)
    # row i starts at offset i*n - i*(i+1)/2 - ... ; invert with the quadratic formula
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * codes)) / 2).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # guard float rounding at row boundaries
    over = codes < start
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = codes >= nxt
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = codes - start + i + 1
    return np.column_stack((i, j))


def index_from_pair(u, v, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * (2 * n - lo - 1) // 2 + (hi - lo - 1)
