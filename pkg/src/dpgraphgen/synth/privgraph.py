"""PrivGraph: private community partition, then per-community Chung-Lu
wiring from noisy intra-community degrees and noisy inter-community counts."""

import math

import numpy as np

from ..community import canonical_labels, louvain_weighted
from ..construct import construct_chung_lu, repair_degrees
from ..graph import Graph
from ..privacy import exponential_index, laplace_noise
from .base import Run, check_shares

MAX_SUPER_NODES = 256


def coarse_partition(g, epsilon, rng, max_super=MAX_SUPER_NODES):
    """Louvain on a noisy super-node graph.

    Nodes are grouped into random super-nodes; each super-node pair's edge
    count (sensitivity 1) gets Laplace noise.
    """
    n = g.n
    k = min(n, max_super)
    perm = rng.permutation(n)
    sup = np.empty(n, dtype=np.int64)
    sup[perm] = np.arange(n) % k
    counts = np.zeros((k, k))
    if g.m:
        a, b = sup[g.edges[:, 0]], sup[g.edges[:, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        np.add.at(counts, (lo, hi), 1.0)
    iu, ju = np.triu_indices(k)
    w = counts[iu, ju] + laplace_noise(1.0, epsilon, rng, iu.size)
    w = np.maximum(np.rint(w), 0.0)
    keep = w > 0
    labels = louvain_weighted(k, np.column_stack((iu[keep], ju[keep])), w[keep],
                              seed=int(rng.integers(1 << 31)))
    return labels[sup]


def refine_partition(g, labels, epsilon, rng):
    """One pass of per-node exponential-mechanism moves.

    Quality of community C for node i is ``k_iC - d_i |C| / n``: edges into
    C minus what a uniform null model would give. Toggling an edge changes
    only the endpoints' scores, each by at most 1, so every selection runs
    with ``epsilon / 2``.
    """
    n = g.n
    labels = labels.copy()
    k = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    deg = g.degrees.astype(np.float64)
    indptr, indices = g.csr
    for i in rng.permutation(n).tolist():
        k_in = np.bincount(labels[indices[indptr[i]:indptr[i + 1]]], minlength=k).astype(np.float64)
        q = k_in - deg[i] * sizes / n
        c = exponential_index(q, 1.0, epsilon / 2.0, rng)
        sizes[labels[i]] -= 1
        sizes[c] += 1
        labels[i] = c
    return canonical_labels(labels)


def privgraph_generate(g, budget, seed, shares=(1 / 3, 1 / 3, 1 / 3), single_community=False,
                       max_super=MAX_SUPER_NODES):
    n = g.n
    if single_community:
        run = Run("PrivGraph", budget, seed, check_shares((1.0,), ["counts"]))
        labels = np.zeros(n, dtype=np.int64)
    else:
        run = Run("PrivGraph", budget, seed, check_shares(shares, ["coarse", "refine", "counts"]))
        with run.timed("partition"):
            st = run.ledger.charge("coarse", "Laplace on super-node edge counts")
            labels = coarse_partition(g, st.epsilon, run.streams("coarse"), max_super)
            st = run.ledger.charge("refine", "exponential mechanism per node")
            labels = refine_partition(g, labels, st.epsilon, run.streams("refine"))
    k = int(labels.max()) + 1 if n else 0
    with run.timed("perturb"):
        st = run.ledger.charge("counts", "Laplace on intra degrees and inter-community counts")
        rng = run.streams("counts")
        intra = np.zeros(n, dtype=np.int64)
        inter = np.zeros((k, k))
        if g.m:
            a, b = g.edges[:, 0], g.edges[:, 1]
            same = labels[a] == labels[b]
            intra += np.bincount(a[same], minlength=n) + np.bincount(b[same], minlength=n)
            la, lb = labels[a[~same]], labels[b[~same]]
            np.add.at(inter, (np.minimum(la, lb), np.maximum(la, lb)), 1.0)
        # an edge is either intra (two degrees move) or inter (one count moves)
        noisy_intra = intra + laplace_noise(2.0, st.epsilon, rng, n)
        iu, ju = np.triu_indices(k, 1)
        noisy_inter = inter[iu, ju] + laplace_noise(1.0, st.epsilon, rng, iu.size)
    with run.timed("construct"):
        crng = run.streams("construct")
        members = [np.flatnonzero(labels == c) for c in range(k)]
        chunks = []
        for mem in members:
            if mem.size < 2:
                continue
            d = repair_degrees(noisy_intra[mem], mem.size)
            sub = construct_chung_lu(d, crng)
            chunks.append(mem[sub.edges])
        for a, b, cnt in zip(iu.tolist(), ju.tolist(), noisy_inter.tolist()):
            A, B = members[a], members[b]
            pop = A.size * B.size
            c = int(min(max(round(cnt), 0), pop))
            if c == 0:
                continue
            idx = crng.choice(pop, size=c, replace=False)
            chunks.append(np.column_stack((A[idx // B.size], B[idx % B.size])))
        edges = np.vstack(chunks) if chunks else np.empty((0, 2), np.int64)
        out = Graph(n, edges)
    run.summaries.update(communities=k, labels=labels)
    return run.finish(out)
