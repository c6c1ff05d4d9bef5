"""The fifteen graph queries, each a pure function of a Graph."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .community import louvain
from .graph import Graph, largest_component

EXACT_PATH_LIMIT = 3000
SAMPLED_SOURCES = 500
EVC_TOL = 1e-8
EVC_MAX_ITER = 1000


class QueryError(ValueError):
    """Query undefined on this graph (e.g. no wedges, zero variance)."""


@dataclass(frozen=True)
class QueryValue:
    """Tagged query result: ``scalar``, ``distribution``, ``partition`` or ``scores``."""

    kind: str
    value: object
    flags: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("scalar", "distribution", "partition", "scores"):
            raise ValueError(f"unknown query value kind {self.kind!r}")


def _scalar(x, *flags):
    return QueryValue("scalar", float(x), tuple(flags))


# ---------------------------------------------------------------- counting

def q_node_count(g: Graph) -> QueryValue:
    return _scalar(g.n)


def q_edge_count(g: Graph) -> QueryValue:
    return _scalar(g.m)


def triangle_count(g: Graph) -> int:
    if g.m == 0:
        return 0
    indptr, indices = g.csr
    return int(kernels.triangles_per_node(indptr, indices).sum() // 3)


def q_triangles(g: Graph) -> QueryValue:
    return _scalar(triangle_count(g))


# ---------------------------------------------------------------- degree

def q_avg_degree(g: Graph) -> QueryValue:
    if g.n == 0:
        raise QueryError("average degree of an empty graph")
    return _scalar(2.0 * g.m / g.n)


def q_degree_variance(g: Graph) -> QueryValue:
    if g.n == 0:
        raise QueryError("degree variance of an empty graph")
    return _scalar(np.var(g.degrees.astype(np.float64)))


def q_degree_distribution(g: Graph) -> QueryValue:
    """Fraction of nodes with degree k, for k = 0..max degree."""
    if g.n == 0:
        raise QueryError("degree distribution of an empty graph")
    h = np.bincount(g.degrees).astype(np.float64)
    return QueryValue("distribution", h / h.sum())


# ---------------------------------------------------------------- path

@dataclass(frozen=True)
class DistanceProfile:
    hist: np.ndarray      # hist[d] = ordered (source, target) pairs at distance d >= 1
    max_ecc: int
    sources: int
    approximate: bool


@lru_cache(maxsize=16)
def distance_profile(g: Graph) -> DistanceProfile:
    """BFS distances within the largest component.

    Exact from every source up to ``EXACT_PATH_LIMIT`` nodes, otherwise from
    ``SAMPLED_SOURCES`` sources drawn with a fixed seed.
    """
    lcc = largest_component(g)
    if lcc.size < 2:
        raise QueryError("no finite distances")
    sub, _ = g.subgraph(lcc)
    indptr, indices = sub.csr
    if sub.n <= EXACT_PATH_LIMIT:
        sources = np.arange(sub.n, dtype=np.int64)
        approx = False
    else:
        rng = np.random.default_rng(0)
        sources = np.sort(rng.choice(sub.n, size=SAMPLED_SOURCES, replace=False)).astype(np.int64)
        approx = True
    hist, ecc = kernels.bfs_distance_counts(indptr, indices, sources)
    return DistanceProfile(np.asarray(hist, dtype=np.int64), int(np.max(ecc)), int(sources.size), approx)


def _path_flags(p: DistanceProfile):
    return ("approximate",) if p.approximate else ()


def q_diameter(g: Graph) -> QueryValue:
    p = distance_profile(g)
    return _scalar(p.max_ecc, *_path_flags(p))


def q_avg_path(g: Graph) -> QueryValue:
    p = distance_profile(g)
    d = np.arange(p.hist.size, dtype=np.float64)
    return _scalar((d * p.hist).sum() / p.hist.sum(), *_path_flags(p))


def q_distance_distribution(g: Graph) -> QueryValue:
    """Fraction of connected pairs at distance d, indexed from d = 0 (always 0)."""
    p = distance_profile(g)
    h = p.hist.astype(np.float64)
    return QueryValue("distribution", h / h.sum(), _path_flags(p))


# ---------------------------------------------------------------- topology

def wedge_count(g: Graph) -> int:
    d = g.degrees.astype(np.int64)
    return int((d * (d - 1) // 2).sum())


def q_gcc(g: Graph) -> QueryValue:
    w = wedge_count(g)
    if w == 0:
        raise QueryError("global clustering undefined without wedges")
    return _scalar(3.0 * triangle_count(g) / w)


def local_clustering(g: Graph) -> np.ndarray:
    """C_i = triangles at i / C(d_i, 2), with C_i = 0 when d_i < 2."""
    d = g.degrees.astype(np.float64)
    if g.m == 0:
        return np.zeros(g.n)
    indptr, indices = g.csr
    t = kernels.triangles_per_node(indptr, indices).astype(np.float64)
    pairs = d * (d - 1) / 2.0
    out = np.zeros(g.n)
    ok = pairs > 0
    out[ok] = t[ok] / pairs[ok]
    return out


def q_acc(g: Graph) -> QueryValue:
    if g.n == 0:
        raise QueryError("average clustering of an empty graph")
    return _scalar(local_clustering(g).mean())


def q_community_detection(g: Graph, seed: int = 0) -> QueryValue:
    """Louvain communities (resolution 1); isolated nodes are singletons."""
    return QueryValue("partition", louvain(g, seed=seed))


def modularity(g: Graph, labels) -> float:
    if g.m == 0:
        raise QueryError("modularity undefined without edges")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError("one label per node is required")
    k = int(labels.max()) + 1
    a, b = labels[g.edges[:, 0]], labels[g.edges[:, 1]]
    intra = np.bincount(a[a == b], minlength=k).astype(np.float64)
    deg = np.bincount(labels, weights=g.degrees.astype(np.float64), minlength=k)
    m = float(g.m)
    return float((intra / m - (deg / (2.0 * m)) ** 2).sum())


def q_modularity(g: Graph, partition=None, seed: int = 0) -> QueryValue:
    """Modularity of ``partition`` (default: this graph's Louvain partition)."""
    if g.m == 0:
        raise QueryError("modularity undefined without edges")
    if partition is None:
        partition = q_community_detection(g, seed).value
    elif isinstance(partition, QueryValue):
        partition = partition.value
    return _scalar(modularity(g, partition))


def q_assortativity(g: Graph) -> QueryValue:
    """Pearson correlation of endpoint degrees over both edge orientations."""
    if g.m == 0:
        raise QueryError("assortativity undefined without edges")
    d = g.degrees.astype(np.float64)
    x = np.concatenate((d[g.edges[:, 0]], d[g.edges[:, 1]]))
    y = np.concatenate((d[g.edges[:, 1]], d[g.edges[:, 0]]))
    xc = x - x.mean()
    yc = y - y.mean()
    den = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    if den <= 1e-12 * max(1.0, float((x * x).sum())):
        raise QueryError("assortativity undefined: endpoint degrees have zero variance")
    return _scalar((xc * yc).sum() / den)


# ---------------------------------------------------------------- centrality

def q_eigenvector_centrality(g: Graph) -> QueryValue:
    """Power iteration on A + I over the largest component.

    The identity shift keeps bipartite components from oscillating without
    changing the leading eigenvector. Nodes outside the component score 0.
    """
    if g.m == 0:
        raise QueryError("eigenvector centrality undefined without edges")
    lcc = largest_component(g)
    sub, _ = g.subgraph(lcc)
    A = sub.adjacency_matrix()
    x = np.full(sub.n, 1.0 / np.sqrt(sub.n))
    converged = False
    for _ in range(EVC_MAX_ITER):
        y = A @ x + x
        y /= np.linalg.norm(y)
        if np.linalg.norm(y - x) < EVC_TOL:
            x = y
            converged = True
            break
        x = y
    scores = np.zeros(g.n)
    scores[lcc] = x
    return QueryValue("scores", scores, () if converged else ("not-converged",))


# ---------------------------------------------------------------- registry

class QueryId(enum.Enum):
    Q1 = ("V", "counting", "scalar")
    Q2 = ("E", "counting", "scalar")
    Q3 = ("Tri", "counting", "scalar")
    Q4 = ("d_avg", "degree", "scalar")
    Q5 = ("d_var", "degree", "scalar")
    Q6 = ("d_dist", "degree", "distribution")
    Q7 = ("l_max", "path", "scalar")
    Q8 = ("l_avg", "path", "scalar")
    Q9 = ("l_dist", "path", "distribution")
    Q10 = ("GCC", "topology", "scalar")
    Q11 = ("ACC", "topology", "scalar")
    Q12 = ("CD", "topology", "partition")
    Q13 = ("Mod", "topology", "scalar")
    Q14 = ("Ass", "topology", "scalar")
    Q15 = ("EVC", "centrality", "scores")

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def category(self) -> str:
        return self.value[1]

    @property
    def kind(self) -> str:
        return self.value[2]

    @property
    def number(self) -> int:
        return int(self.name[1:])


CATEGORIES = ("counting", "degree", "path", "topology", "centrality")

_FUNCS = {
    QueryId.Q1: q_node_count,
    QueryId.Q2: q_edge_count,
    QueryId.Q3: q_triangles,
    QueryId.Q4: q_avg_degree,
    QueryId.Q5: q_degree_variance,
    QueryId.Q6: q_degree_distribution,
    QueryId.Q7: q_diameter,
    QueryId.Q8: q_avg_path,
    QueryId.Q9: q_distance_distribution,
    QueryId.Q10: q_gcc,
    QueryId.Q11: q_acc,
    QueryId.Q12: q_community_detection,
    QueryId.Q13: q_modularity,
    QueryId.Q14: q_assortativity,
    QueryId.Q15: q_eigenvector_centrality,
}

_ALIASES = {
    "nodes": "Q1", "n": "Q1", "v": "Q1",
    "edges": "Q2", "m": "Q2", "e": "Q2",
    "triangles": "Q3", "tri": "Q3",
    "avgdegree": "Q4", "davg": "Q4",
    "degreevariance": "Q5", "dvar": "Q5",
    "degreedistribution": "Q6", "ddist": "Q6",
    "diameter": "Q7", "lmax": "Q7",
    "avgpath": "Q8", "lavg": "Q8",
    "distancedistribution": "Q9", "ldist": "Q9",
    "gcc": "Q10", "transitivity": "Q10",
    "acc": "Q11",
    "cd": "Q12", "community": "Q12", "communities": "Q12",
    "mod": "Q13", "modularity": "Q13",
    "ass": "Q14", "assortativity": "Q14",
    "evc": "Q15", "eigenvector": "Q15",
}


def resolve_query(name) -> QueryId:
    if isinstance(name, QueryId):
        return name
    key = re.sub(r"[^a-z0-9]", "", str(name).lower())
    if re.fullmatch(r"q?\d+", key):
        key = "Q" + key.lstrip("q")
    else:
        key = _ALIASES.get(key, key)
    try:
        return QueryId[key.upper()]
    except KeyError:
        labels = ", ".join(q.label for q in QueryId)
        raise ValueError(f"unknown query {name!r}; choose Q1..Q15 or one of {labels}") from None


def evaluate(qid, g: Graph, seed: int = 0) -> QueryValue:
    """Evaluate one query; ``seed`` only affects community detection."""
    qid = resolve_query(qid)
    if qid is QueryId.Q12:
        return q_community_detection(g, seed)
    if qid is QueryId.Q13:
        return q_modularity(g, seed=seed)
    return _FUNCS[qid](g)
