"""Error metrics comparing true-graph and synthetic-graph query values."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

RE_GUARD = 1e-12
KL_SMOOTHING = 1e-9

METRICS = ("RE", "MRE", "KL", "HD", "KS", "Avg-F1", "MAE", "MSE", "ARI", "AMI", "NMI")
HIGHER_IS_BETTER = frozenset({"Avg-F1", "ARI", "AMI", "NMI"})


def higher_is_better(metric: str) -> bool:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    return metric in HIGHER_IS_BETTER


# ---------------------------------------------------------------- scalars

def relative_error(true_v: float, syn_v: float) -> float:
    """|true - syn| / max(|true|, 1e-12)."""
    return abs(float(true_v) - float(syn_v)) / max(abs(float(true_v)), RE_GUARD)


def degenerate_denominator(true_v: float) -> bool:
    return abs(float(true_v)) < RE_GUARD


def mean_relative_error(true_vs, syn_vs, relative: bool = False) -> float:
    """Mean absolute difference of paired entries.

    With ``relative`` each entry is divided by its guarded true value.
    """
    a = np.asarray(true_vs, dtype=np.float64)
    b = np.asarray(syn_vs, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty vectors")
    diff = np.abs(a - b)
    if relative:
        diff = diff / np.maximum(np.abs(a), RE_GUARD)
    return float(diff.mean())


# ---------------------------------------------------------------- distributions

def align(p, q):
    """Zero-pad two vectors to a common length."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    k = max(p.size, q.size)
    return np.pad(p, (0, k - p.size)), np.pad(q, (0, k - q.size))


def _normalise(p):
    s = p.sum()
    if s <= 0:
        raise ValueError("distribution has no mass")
    return p / s


def kl_divergence(p, q, smoothing: float = KL_SMOOTHING) -> float:
    """KL(p || q) after additive smoothing and renormalisation of both sides."""
    p, q = align(p, q)
    p = _normalise(_normalise(p) + smoothing)
    q = _normalise(_normalise(q) + smoothing)
    return float(max(0.0, (p * np.log(p / q)).sum()))


def hellinger(p, q) -> float:
    p, q = align(p, q)
    p, q = _normalise(p), _normalise(q)
    h = np.linalg.norm(np.sqrt(p) - np.sqrt(q)) / math.sqrt(2.0)
    return float(min(1.0, h))


def ks_statistic(p, q) -> float:
    p, q = align(p, q)
    p, q = _normalise(p), _normalise(q)
    return float(min(1.0, np.max(np.abs(np.cumsum(p) - np.cumsum(q)))))


# ---------------------------------------------------------------- vectors

def _pad_pair(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    padded = a.size != b.size
    a, b = align(a, b)
    return a, b, padded


def mae(a, b) -> float:
    a, b, _ = _pad_pair(a, b)
    if a.size == 0:
        raise ValueError("empty vectors")
    return float(np.abs(a - b).mean())


def mse(a, b) -> float:
    a, b, _ = _pad_pair(a, b)
    if a.size == 0:
        raise ValueError("empty vectors")
    return float(((a - b) ** 2).mean())


def sorted_scores(a) -> np.ndarray:
    """Descending order, used to compare score vectors without node alignment."""
    return np.sort(np.asarray(a, dtype=np.float64))[::-1]


# ---------------------------------------------------------------- partitions

def contingency(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    c = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(c, (ia, ib), 1)
    return c


def _entropy(counts) -> float:
    counts = counts[counts > 0].astype(np.float64)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def mutual_information(c: np.ndarray) -> float:
    N = c.sum()
    a = c.sum(axis=1).astype(np.float64)
    b = c.sum(axis=0).astype(np.float64)
    i, j = np.nonzero(c)
    nij = c[i, j].astype(np.float64)
    return float(max(0.0, (nij / N * (np.log(nij * N) - np.log(a[i] * b[j]))).sum()))


def _trivial(c) -> bool:
    # both partitions a single block (or both all-singletons of the same shape)
    return c.shape[0] == c.shape[1] == 1 or c.shape[0] == c.shape[1] == c.sum()


def nmi(a, b) -> float:
    """Mutual information over the arithmetic mean of the two entropies."""
    c = contingency(a, b)
    if _trivial(c):
        return 1.0
    mi = mutual_information(c)
    norm = 0.5 * (_entropy(c.sum(axis=1)) + _entropy(c.sum(axis=0)))
    if norm <= 0:
        return 0.0
    return float(min(1.0, max(0.0, mi / norm)))


def expected_mutual_information(c: np.ndarray) -> float:
    """Expected MI of two random partitions with the same block sizes
    (hypergeometric model)."""
    N = int(c.sum())
    a = c.sum(axis=1)
    b = c.sum(axis=0)
    lg = gammaln(np.arange(N + 2, dtype=np.float64))
    total = 0.0
    for ai in a.tolist():
        for bj in b.tolist():
            lo = max(1, ai + bj - N)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1)
            term = nij / N * (np.log(N * nij) - math.log(ai * bj))
            logp = (lg[ai + 1] + lg[bj + 1] + lg[N - ai + 1] + lg[N - bj + 1] - lg[N + 1]
                    - lg[nij + 1] - lg[ai - nij + 1] - lg[bj - nij + 1] - lg[N - ai - bj + nij + 1])
            total += float((term * np.exp(logp)).sum())
    return total


def ami(a, b) -> float:
    """Adjusted mutual information, arithmetic normalisation, floored at 0."""
    c = contingency(a, b)
    if _trivial(c):
        return 1.0
    mi = mutual_information(c)
    emi = expected_mutual_information(c)
    norm = 0.5 * (_entropy(c.sum(axis=1)) + _entropy(c.sum(axis=0)))
    den = norm - emi
    eps = np.finfo(np.float64).eps
    den = min(den, -eps) if den < 0 else max(den, eps)
    # worse-than-chance agreement is reported as 0 to keep AMI in [0, 1]
    return float(min(1.0, max(0.0, (mi - emi) / den)))


def ari(a, b) -> float:
    c = contingency(a, b)
    N = c.sum()

    def comb2(x):
        x = np.asarray(x, dtype=np.float64)
        return (x * (x - 1) / 2.0).sum()

    sum_ij = comb2(c)
    sum_a = comb2(c.sum(axis=1))
    sum_b = comb2(c.sum(axis=0))
    total = N * (N - 1) / 2.0
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float(min(1.0, (sum_ij - expected) / (max_index - expected)))


def avg_f1(a, b) -> float:
    """Mean over both directions of each block's best-match F1 score."""
    c = contingency(a, b).astype(np.float64)
    sa = c.sum(axis=1)
    sb = c.sum(axis=0)
    f1 = 2.0 * c / (sa[:, None] + sb[None, :])
    return float(min(1.0, 0.5 * (f1.max(axis=1).mean() + f1.max(axis=0).mean())))


def partition_scores(true_p, syn_p) -> tuple[dict, list]:
    """NMI, ARI, AMI and Avg-F1 on the shared node IDs.

    Returns ``(scores, flags)``; a node-count mismatch restricts the
    comparison to IDs present in both and adds a flag.
    """
    a = np.asarray(true_p)
    b = np.asarray(syn_p)
    flags = []
    if a.size != b.size:
        k = min(a.size, b.size)
        a, b = a[:k], b[:k]
        flags.append("node-set-mismatch")
    if a.size == 0:
        raise ValueError("no shared nodes")
    scores = {"NMI": nmi(a, b), "ARI": ari(a, b), "AMI": ami(a, b), "Avg-F1": avg_f1(a, b)}
    return scores, flags


# ---------------------------------------------------------------- range checks

def check_range(metric: str, value: float) -> bool:
    """Whether ``value`` lies in the declared range of ``metric``."""
    if not math.isfinite(value):
        return False
    if metric in ("KL", "RE", "MRE", "MAE", "MSE"):
        return value >= 0
    if metric in ("HD", "KS", "NMI", "AMI", "Avg-F1"):
        return -1e-12 <= value <= 1 + 1e-12
    if metric == "ARI":
        return value <= 1 + 1e-12
    raise ValueError(f"unknown metric {metric!r}")
