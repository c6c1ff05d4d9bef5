"""Graph construction back-ends that turn (perturbed) summaries into graphs.

None of these spend privacy budget; they only post-process released values.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, pair_from_index


class GraphicalityError(ValueError):
    """Degree sequence is not graphical even after repair."""

    def __init__(self, message, repaired):
        super().__init__(message)
        self.repaired = np.asarray(repaired, dtype=np.int64)


def _sample_distinct(rng: np.random.Generator, population: int, k: int) -> np.ndarray:
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k >= population:
        return np.arange(population, dtype=np.int64)
    return np.sort(rng.choice(population, size=k, replace=False)).astype(np.int64)


def repair_degrees(noisy, n: int | None = None) -> np.ndarray:
    """Round, clamp to ``[0, n-1]`` and make the sum even.

    Parity is fixed by decrementing the largest entry (lowest index on ties).
    """
    d = np.rint(np.asarray(noisy, dtype=np.float64))
    n = d.shape[0] if n is None else n
    d = np.clip(d, 0, max(n - 1, 0)).astype(np.int64)
    if d.sum() % 2:
        d[int(np.argmax(d))] -= 1
    return d


def is_graphical(degrees) -> bool:
    """Erdos-Gallai test."""
    d = np.sort(np.asarray(degrees, dtype=np.int64))[::-1]
    if d.size == 0:
        return True
    if d[-1] < 0 or d.sum() % 2:
        return False
    n = d.size
    csum = np.cumsum(d)
    for k in range(1, n + 1):
        rhs = k * (k - 1) + np.minimum(d[k:], k).sum()
        if csum[k - 1] > rhs:
            return False
    return True


# ---------------------------------------------------------------- Havel-Hakimi

def construct_havel_hakimi(degrees, best_effort: bool = False) -> Graph:
    """Deterministic Havel-Hakimi realisation.

    Ties are broken by node ID. With ``best_effort`` a non-graphical
    sequence yields the graph built before stubs ran out instead of an
    error.
    """
    d = np.asarray(degrees, dtype=np.int64).copy()
    n = d.size
    if (d < 0).any():
        raise GraphicalityError("negative degree", d)
    if not best_effort and not is_graphical(d):
        raise GraphicalityError("degree sequence is not graphical", d)
    rem = d.copy()
    edges = []
    ids = np.arange(n)
    while True:
        # descending by remaining degree, ascending node ID on ties
        order = np.lexsort((ids, -rem))
        u = order[0]
        k = int(rem[u])
        if k == 0:
            break
        rem[u] = 0
        targets = order[1:k + 1]
        targets = targets[rem[targets] > 0]
        if targets.size < k and not best_effort:
            raise GraphicalityError("degree sequence is not graphical", d)
        rem[targets] -= 1
        for v in targets.tolist():
            edges.append((u, v))
    return Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


# ---------------------------------------------------------------- Chung-Lu

def chung_lu_class_probabilities(weights, fit: bool = True, max_iter: int = 500, tol: float = 1e-9):
    """Per-weight-class connection probabilities ``min(1, x_a x_b)``.

    Without ``fit`` ``x = w / sqrt(sum w)``, the textbook Chung-Lu choice.
    With ``fit`` the ``x`` are rescaled by fixed-point iteration until the
    expected degree of every class matches its weight, which matters once
    probabilities saturate at 1.

    Returns ``(values, inverse, counts, P)``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if (w < 0).any():
        raise ValueError("weights must be non-negative")
    vals, inv, counts = np.unique(w, return_inverse=True, return_counts=True)
    total = w.sum()
    if total <= 0:
        return vals, inv, counts, np.zeros((vals.size, vals.size))
    x = vals / math.sqrt(total)
    if fit:
        active = vals > 0
        for _ in range(max_iter):
            P = np.minimum(1.0, np.outer(x, x))
            expected = P @ counts - np.diag(P)
            err = np.zeros_like(x)
            ok = active & (expected > 0)
            err[ok] = vals[ok] / expected[ok]
            if ok.any() and np.max(np.abs(err[ok] - 1.0)) < tol:
                break
            # expected degree scales like x**2 when nothing saturates, hence the root
            ratio = np.ones_like(x)
            ratio[ok] = np.sqrt(np.clip(err[ok], 0.25, 4.0))
            x = np.minimum(x * ratio, 1e6)
    P = np.minimum(1.0, np.outer(x, x))
    return vals, inv, counts, P


def construct_chung_lu(weights, rng: np.random.Generator, fit: bool = True) -> Graph:
    """Independent edges with Chung-Lu probabilities (see ``chung_lu_class_probabilities``)."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.size
    if n < 2 or w.sum() <= 0:
        return Graph(n)
    vals, inv, counts, P = chung_lu_class_probabilities(w, fit=fit)
    members = [np.flatnonzero(inv == c) for c in range(vals.size)]
    chunks = []
    for a in range(vals.size):
        if vals[a] <= 0:
            continue
        ma = members[a]
        for b in range(a, vals.size):
            p = P[a, b]
            if p <= 0:
                continue
            mb = members[b]
            if a == b:
                pop = ma.size * (ma.size - 1) // 2
                if pop == 0:
                    continue
                k = int(rng.binomial(pop, p))
                idx = _sample_distinct(rng, pop, k)
                pr = pair_from_index(idx, ma.size)
                chunks.append(np.column_stack((ma[pr[:, 0]], ma[pr[:, 1]])))
            else:
                pop = ma.size * mb.size
                k = int(rng.binomial(pop, p))
                idx = _sample_distinct(rng, pop, k)
                chunks.append(np.column_stack((ma[idx // mb.size], mb[idx % mb.size])))
    edges = np.vstack(chunks) if chunks else np.empty((0, 2), np.int64)
    return Graph(n, edges)


# ---------------------------------------------------------------- BTER

DEFAULT_TARGET_ACC = 0.3


def construct_bter(degrees, target_acc: float | None, rng: np.random.Generator, fit: bool = True) -> Graph:
    """Block two-level Erdos-Renyi graph.

    Phase 1 groups nodes of degree >= 2 in ascending degree order into
    affinity blocks of ``d_min + 1`` nodes, each wired as ER with density
    ``target_acc ** (1/3)`` (a node's clustering in such a block is roughly
    the cube of the block density). Phase 2 spends each node's leftover
    degree through Chung-Lu.
    """
    d = np.asarray(degrees, dtype=np.int64)
    n = d.size
    if target_acc is None:
        target_acc = DEFAULT_TARGET_ACC
    if not 0.0 <= target_acc <= 1.0:
        raise ValueError("target_acc must lie in [0, 1]")
    if n < 2 or d.sum() == 0:
        return Graph(n)
    rho = float(target_acc) ** (1.0 / 3.0)
    excess = d.astype(np.float64)
    # shuffle before the stable sort so equal-degree nodes mix across blocks
    perm = rng.permutation(n)
    order = perm[np.argsort(d[perm], kind="stable")]
    order = order[d[order] >= 2]
    chunks = []
    i = 0
    while i < order.size:
        size = int(d[order[i]]) + 1
        block = order[i:i + size]
        i += size
        nb = block.size
        if nb < 2:
            continue
        excess[block] = np.maximum(0.0, d[block] - rho * (nb - 1))
        pop = nb * (nb - 1) // 2
        k = int(rng.binomial(pop, rho)) if rho < 1.0 else pop
        idx = _sample_distinct(rng, pop, k)
        pr = pair_from_index(idx, nb)
        chunks.append(np.column_stack((block[pr[:, 0]], block[pr[:, 1]])))
    phase2 = construct_chung_lu(excess, rng, fit=fit)
    chunks.append(phase2.edges)
    return Graph(n, np.vstack(chunks))


# ---------------------------------------------------------------- dK-2

@dataclass
class JointDegreeMatrix:
    """Edge counts keyed by endpoint-degree pairs ``(a, b)`` with ``a <= b``."""

    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (a, b), c in self.counts.items():
            a, b = int(a), int(b)
            c = int(c)
            if c < 0:
                raise ValueError("joint degree counts must be non-negative")
            if a > b:
                a, b = b, a
            if c:
                clean[(a, b)] = clean.get((a, b), 0) + c
        self.counts = clean

    @property
    def m(self) -> int:
        return sum(self.counts.values())

    def stubs(self) -> dict:
        """Endpoint count per degree class."""
        out: dict[int, int] = defaultdict(int)
        for (a, b), c in self.counts.items():
            out[a] += c
            out[b] += c
        return dict(out)

    def degree_histogram(self) -> dict:
        """Implied ``degree -> node count`` (ceil when stubs don't divide)."""
        return {k: -(-s // k) for k, s in self.stubs().items() if k > 0}

    def l1(self, other: "JointDegreeMatrix") -> int:
        keys = set(self.counts) | set(other.counts)
        return sum(abs(self.counts.get(k, 0) - other.counts.get(k, 0)) for k in keys)


def joint_degree_matrix(g: Graph) -> JointDegreeMatrix:
    if g.m == 0:
        return JointDegreeMatrix({})
    d = g.degrees
    a = d[g.edges[:, 0]]
    b = d[g.edges[:, 1]]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    pairs, cnt = np.unique(np.column_stack((lo, hi)), axis=0, return_counts=True)
    return JointDegreeMatrix({(int(x), int(y)): int(c) for (x, y), c in zip(pairs, cnt)})


@dataclass
class Dk2Report:
    requested_edges: int
    unresolved: int
    swaps_used: int
    swap_budget: int

    @property
    def feasible(self) -> bool:
        return self.unresolved == 0


def construct_dk2(jdm: JointDegreeMatrix, rng: np.random.Generator, n: int | None = None,
                  swap_factor: int = 10, return_report: bool = False):
    """Stub matching per joint-degree cell, then endpoint swaps to remove
    self-loops and multi-edges.

    Swaps exchange endpoints of equal degree class, so every cell count and
    every node's stub count is preserved. After ``swap_factor * m`` attempts
    the remaining defects are dropped and counted in the report. Nodes are
    numbered by ascending degree class; ``n`` pads with isolated nodes.
    """
    stubs = jdm.stubs()
    classes = sorted(k for k in stubs if k > 0)
    node_class = []
    stub_lists = {}
    next_id = 0
    for k in classes:
        s = stubs[k]
        nk = -(-s // k)
        ids = np.arange(next_id, next_id + nk, dtype=np.int64)
        caps = np.full(nk, k, dtype=np.int64)
        caps[-1] = s - k * (nk - 1)
        st = np.repeat(ids, caps)
        rng.shuffle(st)
        stub_lists[k] = st
        node_class.extend([k] * nk)
        next_id += nk
    n_implied = next_id
    n_out = max(n_implied, n or 0)
    cursor = {k: 0 for k in classes}
    us, vs = [], []
    for (a, b) in sorted(jdm.counts):
        c = jdm.counts[(a, b)]
        if a == b:
            blk = stub_lists[a][cursor[a]:cursor[a] + 2 * c]
            cursor[a] += 2 * c
            us.append(blk[:c])
            vs.append(blk[c:])
        else:
            us.append(stub_lists[a][cursor[a]:cursor[a] + c])
            cursor[a] += c
            vs.append(stub_lists[b][cursor[b]:cursor[b] + c])
            cursor[b] += c
    if not us:
        g = Graph(n_out)
        rep = Dk2Report(0, 0, 0, 0)
        return (g, rep) if return_report else g
    U = np.concatenate(us).tolist()
    V = np.concatenate(vs).tolist()
    m = len(U)
    cls = node_class

    def key(x, y):
        return (x, y) if x < y else (y, x)

    multiplicity = Counter(key(u, v) for u, v in zip(U, V))
    # endpoints by degree class: (edge index, side)
    by_class: dict[int, list] = defaultdict(list)
    for i in range(m):
        by_class[cls[U[i]]].append((i, 0))
        by_class[cls[V[i]]].append((i, 1))

    def bad(i):
        u, v = U[i], V[i]
        return u == v or multiplicity[key(u, v)] > 1

    budget = swap_factor * m
    used = 0
    queue = [i for i in range(m) if bad(i)]
    while queue and used < budget:
        i = queue.pop()
        if not bad(i):
            continue
        side = int(rng.integers(2))
        pool = by_class[cls[V[i] if side else U[i]]]
        fixed = False
        for _ in range(8):
            if used >= budget:
                break
            used += 1
            j, sj = pool[int(rng.integers(len(pool)))]
            if j == i:
                continue
            # exchange endpoint `side` of edge i with endpoint `sj` of edge j
            ei = [U[i], V[i]]
            ej = [U[j], V[j]]
            ei[side], ej[sj] = ej[sj], ei[side]
            if ei[0] == ei[1] or ej[0] == ej[1]:
                continue
            ki, kj = key(*ei), key(*ej)
            oi, oj = key(U[i], V[i]), key(U[j], V[j])
            multiplicity[oi] -= 1
            multiplicity[oj] -= 1
            if multiplicity[ki] > 0 or multiplicity[kj] > 0 or ki == kj:
                multiplicity[oi] += 1
                multiplicity[oj] += 1
                continue
            multiplicity[ki] += 1
            multiplicity[kj] += 1
            U[i], V[i] = ei
            U[j], V[j] = ej
            # keep the class index consistent with the new endpoints
            fixed = True
            break
        if not fixed:
            queue.insert(0, i)
    edges = np.column_stack((np.asarray(U, dtype=np.int64), np.asarray(V, dtype=np.int64)))
    g = Graph(n_out, edges)
    rep = Dk2Report(m, m - g.m, used, budget)
    return (g, rep) if return_report else g


# ---------------------------------------------------------------- Kronecker

@dataclass(frozen=True)
class KroneckerInitiator:
    """Symmetric 2x2 initiator ``[[a, b], [b, c]]`` raised to ``levels``."""

    a: float
    b: float
    c: float
    levels: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c):
            if not 0.0 <= v <= 1.0:
                raise ValueError("initiator entries must lie in [0, 1]")
        if self.levels < 0:
            raise ValueError("levels must be non-negative")

    @property
    def theta(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]], dtype=np.float64)

    @classmethod
    def for_nodes(cls, a, b, c, n: int) -> "KroneckerInitiator":
        return cls(float(a), float(b), float(c), max(0, math.ceil(math.log2(max(n, 1)))))


def _bits(ids: np.ndarray, levels: int) -> np.ndarray:
    return (ids[:, None] >> np.arange(levels - 1, -1, -1)[None, :]) & 1


def kronecker_probabilities(init: KroneckerInitiator, n: int, rows=None) -> np.ndarray:
    """Edge probabilities ``P[i, j]`` for ``i`` in ``rows`` (default all) and ``j < n``."""
    if (1 << init.levels) < n:
        raise ValueError("2**levels must be at least n")
    rows = np.arange(n) if rows is None else np.asarray(rows)
    theta = init.theta
    bi = _bits(rows, init.levels)
    bj = _bits(np.arange(n), init.levels)
    P = np.ones((rows.size, n), dtype=np.float64)
    for lvl in range(init.levels):
        P *= theta[bi[:, lvl][:, None], bj[:, lvl][None, :]]
    return P


def sample_kronecker(init: KroneckerInitiator, n: int, rng: np.random.Generator,
                     block_cells: int = 1 << 22) -> Graph:
    """Each pair ``i < j < n`` is an edge independently with its Kronecker
    probability; nodes ``>= n`` of the ``2**levels`` model are discarded."""
    if n < 2:
        return Graph(n)
    rows_per_block = max(1, block_cells // n)
    chunks = []
    for start in range(0, n, rows_per_block):
        rows = np.arange(start, min(n, start + rows_per_block))
        P = kronecker_probabilities(init, n, rows)
        U = rng.random(P.shape)
        hit = (U < P) & (np.arange(n)[None, :] > rows[:, None])
        r, c = np.nonzero(hit)
        chunks.append(np.column_stack((rows[r], c)))
    return Graph(n, np.vstack(chunks))


# ---------------------------------------------------------------- HRG dendrogram

@dataclass
class Dendrogram:
    """Binary tree over leaves ``0..n-1``; internal nodes are ``n..2n-2``.

    ``prob[r]`` is the connection probability of internal node ``r`` (unused
    for leaves).
    """

    n: int
    left: np.ndarray
    right: np.ndarray
    parent: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        n = self.n
        for name in ("left", "right", "parent"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        self.prob = np.asarray(self.prob, dtype=np.float64)
        if n >= 2:
            if self.left.shape != (2 * n - 1,):
                raise ValueError("dendrogram arrays must have length 2n-1")
            inner = self.prob[n:]
            if ((inner < 0) | (inner > 1)).any():
                raise ValueError("connection probabilities must lie in [0, 1]")

    @property
    def root(self) -> int:
        roots = np.flatnonzero(self.parent == -1)
        return int(roots[0]) if roots.size else 0

    def sizes(self) -> np.ndarray:
        size = np.zeros(2 * self.n - 1, dtype=np.int64)
        size[:self.n] = 1
        for r in self.postorder():
            if r >= self.n:
                size[r] = size[self.left[r]] + size[self.right[r]]
        return size

    def postorder(self) -> list[int]:
        if self.n < 2:
            return list(range(self.n))
        out = []
        stack = [(self.root, False)]
        while stack:
            z, done = stack.pop()
            if z < self.n or done:
                out.append(z)
            else:
                stack.append((z, True))
                stack.append((int(self.right[z]), False))
                stack.append((int(self.left[z]), False))
        return out

    def depths(self) -> np.ndarray:
        depth = np.zeros(2 * self.n - 1, dtype=np.int64)
        for z in reversed(self.postorder()):
            p = self.parent[z]
            if p >= 0:
                depth[z] = depth[p] + 1
        return depth

    def leaf_ranges(self):
        """Leaf order plus ``(start, stop)`` of every node's contiguous leaf block."""
        order = [z for z in self.postorder() if z < self.n]
        pos = {leaf: i for i, leaf in enumerate(order)}
        start = np.zeros(2 * self.n - 1, dtype=np.int64)
        stop = np.zeros(2 * self.n - 1, dtype=np.int64)
        for z in self.postorder():
            if z < self.n:
                start[z], stop[z] = pos[z], pos[z] + 1
            else:
                start[z] = start[self.left[z]]
                stop[z] = stop[self.right[z]]
        return np.asarray(order, dtype=np.int64), start, stop

    @classmethod
    def from_nested(cls, tree, probs=None) -> "Dendrogram":
        """Build from nested 2-tuples of leaf IDs, e.g. ``((0, 1), (2, 3))``.

        ``probs`` lists internal-node probabilities in postorder.
        """
        leaves = []

        def collect(t):
            if isinstance(t, tuple):
                collect(t[0])
                collect(t[1])
            else:
                leaves.append(int(t))

        collect(tree)
        n = len(leaves)
        left = np.full(2 * n - 1, -1)
        right = np.full(2 * n - 1, -1)
        parent = np.full(2 * n - 1, -1)
        nxt = [n]

        def build(t):
            if not isinstance(t, tuple):
                return int(t)
            a, b = build(t[0]), build(t[1])
            r = nxt[0]
            nxt[0] += 1
            left[r], right[r] = a, b
            parent[a] = parent[b] = r
            return r

        build(tree)
        prob = np.zeros(2 * n - 1)
        if probs is not None:
            prob[n:] = probs
        return cls(n, left, right, parent, prob)

    @classmethod
    def random_balanced(cls, n: int, rng: np.random.Generator) -> "Dendrogram":
        """Balanced tree over a random leaf permutation."""
        left = np.full(max(2 * n - 1, 1), -1)
        right = np.full(max(2 * n - 1, 1), -1)
        parent = np.full(max(2 * n - 1, 1), -1)
        level = list(rng.permutation(n))
        nxt = n
        while len(level) > 1:
            merged = []
            for i in range(0, len(level) - 1, 2):
                a, b = level[i], level[i + 1]
                left[nxt], right[nxt] = a, b
                parent[a] = parent[b] = nxt
                merged.append(nxt)
                nxt += 1
            if len(level) % 2:
                merged.append(level[-1])
            level = merged
        return cls(n, left, right, parent, np.zeros(max(2 * n - 1, 1)))


def sample_from_dendrogram(d: Dendrogram, rng: np.random.Generator) -> Graph:
    """Each leaf pair joins with the probability of its lowest common ancestor."""
    n = d.n
    if n < 2:
        return Graph(n)
    order, start, stop = d.leaf_ranges()
    chunks = []
    for r in range(n, 2 * n - 1):
        p = d.prob[r]
        if p <= 0:
            continue
        lo, ro = d.left[r], d.right[r]
        L = order[start[lo]:stop[lo]]
        R = order[start[ro]:stop[ro]]
        pop = L.size * R.size
        k = pop if p >= 1 else int(rng.binomial(pop, p))
        idx = _sample_distinct(rng, pop, k)
        chunks.append(np.column_stack((L[idx // R.size], R[idx % R.size])))
    edges = np.vstack(chunks) if chunks else np.empty((0, 2), np.int64)
    return Graph(n, edges)
