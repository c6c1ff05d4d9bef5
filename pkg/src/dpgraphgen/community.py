"""Louvain community detection (networkx backend) with canonical labels."""

from __future__ import annotations

import networkx as nx
import numpy as np
from scipy import sparse

from .graph import Graph


def canonical_labels(labels) -> np.ndarray:
    """Relabel so communities are numbered 0.. in order of their smallest member."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return labels.astype(np.int64)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(first.size)
    return rank[inv]


def louvain_weighted(n: int, edges, weights=None, seed: int = 0, resolution: float = 1.0) -> np.ndarray:
    """Louvain partition of a weighted graph on ``0..n-1``.

    ``edges`` may contain self-loops (used for super-node graphs). Nodes
    are inserted in ID order so the sweep order depends only on ``seed``.
    """
    G = nx.Graph()
    G.add_nodes_from(range(n))
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if weights is None:
        weights = np.ones(edges.shape[0])
    for (u, v), w in zip(edges.tolist(), np.asarray(weights, dtype=np.float64).tolist()):
        if w > 0:
            G.add_edge(u, v, weight=w)
    if G.number_of_edges() == 0:
        return np.arange(n, dtype=np.int64)
    comms = nx.community.louvain_communities(G, weight="weight", resolution=resolution, seed=int(seed))
    labels = np.empty(n, dtype=np.int64)
    for c, members in enumerate(comms):
        labels[list(members)] = c
    keep = np.asarray(weights, dtype=np.float64) > 0
    return refine_moves(n, edges[keep], np.asarray(weights, dtype=np.float64)[keep], labels, resolution)


def refine_moves(n: int, edges, weights, labels, resolution: float = 1.0, max_sweeps: int = 1000) -> np.ndarray:
    """Move single nodes (in ID order) while any move raises modularity.

    The aggregated levels of Louvain can leave nodes that would gain from
    switching community; after this pass no single-node move, including
    into a new singleton community, improves modularity.
    """
    labels = np.asarray(labels, dtype=np.int64).copy()
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    w = np.asarray(weights, dtype=np.float64)
    loops = edges[:, 0] == edges[:, 1]
    u, v, wo = edges[~loops, 0], edges[~loops, 1], w[~loops]
    A = sparse.csr_matrix((np.concatenate((wo, wo)), (np.concatenate((u, v)), np.concatenate((v, u)))),
                          shape=(n, n))
    A.sum_duplicates()
    k = np.asarray(A.sum(axis=1)).ravel() + 2.0 * np.bincount(edges[loops, 0], weights=w[loops], minlength=n)
    m2 = k.sum()
    if m2 <= 0:
        return canonical_labels(labels)
    indptr, indices, data = A.indptr, A.indices, A.data
    tot = np.bincount(labels, weights=k, minlength=n + 1).tolist()
    size = np.bincount(labels, minlength=n + 1).tolist()
    free = [c for c in range(n, -1, -1) if size[c] == 0]
    lab = labels.tolist()
    kl = k.tolist()
    scale = resolution / m2
    for _ in range(max_sweeps):
        moved = False
        for i in range(n):
            a = lab[i]
            ki = kl[i]
            links: dict[int, float] = {}
            for p in range(indptr[i], indptr[i + 1]):
                c = lab[indices[p]]
                links[c] = links.get(c, 0.0) + data[p]
            tot[a] -= ki
            size[a] -= 1
            best, best_gain = a, links.get(a, 0.0) - ki * tot[a] * scale
            for c, kic in links.items():
                g = kic - ki * tot[c] * scale
                if g > best_gain + 1e-12 * max(1.0, abs(best_gain)):
                    best, best_gain = c, g
            if best_gain < -1e-12 * max(1.0, ki) and size[a] > 0:
                # alone in a fresh community the gain is exactly 0
                best = free.pop()
            if best != a:
                moved = True
                if size[a] == 0:
                    free.append(a)
            lab[i] = best
            tot[best] += ki
            size[best] += 1
        if not moved:
            break
    return canonical_labels(np.asarray(lab, dtype=np.int64))


def louvain(g: Graph, seed: int = 0, resolution: float = 1.0) -> np.ndarray:
    return louvain_weighted(g.n, g.edges, None, seed, resolution)
