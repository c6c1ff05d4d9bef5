"""TmF: top-m filtering of a Laplace-perturbed adjacency matrix.

The n(n-1)/2 noisy cells are never materialised. A threshold is chosen so
that the expected number of passing cells equals the noisy edge count;
1-cells pass independently, the number of passing 0-cells is binomial and
their positions are uniform. Passing cells get noisy values drawn from the
conditional tail, and the largest ``m~`` are kept.
"""

import math

import numpy as np
from scipy.optimize import brentq

from ..graph import Graph, index_from_pair, pair_from_index
from ..privacy import _open_uniform, laplace_noise
from .base import Run, check_shares


def _survival(x, b):
    """P[Lap(0, b) > x]."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, 0.5 * np.exp(-np.abs(x) / b), 1.0 - 0.5 * np.exp(-np.abs(x) / b))


def _inverse_survival(s, b):
    s = np.asarray(s, dtype=np.float64)
    return np.where(s <= 0.5, -b * np.log(2.0 * s), b * np.log(2.0 * (1.0 - s)))


def solve_threshold(m_noisy: int, total: int, b: float) -> float:
    """theta with m~ P[1+L > theta] + (N - m~) P[L > theta] = m~."""

    def f(t):
        return float(m_noisy * _survival(t - 1.0, b) + (total - m_noisy) * _survival(t, b) - m_noisy)

    lo, hi = -1.0, 2.0
    while f(lo) <= 0:
        lo -= 1.0 + 10.0 * b
    while f(hi) >= 0:
        hi += 1.0 + 10.0 * b
    return brentq(f, lo, hi, xtol=1e-12 * max(1.0, b))


def _sample_zero_cells(rng, k, total, edge_codes, n):
    """``k`` distinct uniform cells outside ``edge_codes``."""
    zeros = total - edge_codes.size
    k = min(k, zeros)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if zeros <= 4_000_000 or 2 * k > zeros:
        pool = np.setdiff1d(np.arange(total, dtype=np.int64), edge_codes, assume_unique=True)
        return np.sort(rng.choice(pool, size=k, replace=False))
    got = np.empty(0, dtype=np.int64)
    while got.size < k:
        draw = rng.integers(0, total, size=2 * (k - got.size) + 16)
        draw = draw[~np.isin(draw, edge_codes)]
        got = np.unique(np.concatenate((got, draw)))
    return np.sort(rng.choice(got, size=k, replace=False))


def tmf_generate(g, budget, seed, shares=(0.1, 0.9)):
    run = Run("TmF", budget, seed, check_shares(shares, ["edge_count", "cells"]))
    n = g.n
    total = n * (n - 1) // 2
    with run.timed("perturb"):
        st1 = run.ledger.charge("edge_count", "Laplace on m")
        m_noisy = int(np.clip(np.rint(g.m + laplace_noise(1.0, st1.epsilon, run.streams("edge_count"))), 0, total))
        st2 = run.ledger.charge("cells", "Laplace on every adjacency cell (high-pass filter)")
        b = 1.0 / st2.epsilon
        rng = run.streams("cells")
        edge_codes = index_from_pair(g.edges[:, 0], g.edges[:, 1], n) if g.m else np.empty(0, np.int64)
        if m_noisy == 0:
            chosen = np.empty(0, dtype=np.int64)
            theta = math.inf
        elif m_noisy >= total:
            chosen = np.arange(total, dtype=np.int64)
            theta = -math.inf
        else:
            theta = solve_threshold(m_noisy, total, b)
            s1 = float(_survival(theta - 1.0, b))
            s0 = float(_survival(theta, b))
            ones = edge_codes[rng.random(edge_codes.size) < s1]
            k0 = int(rng.binomial(total - edge_codes.size, s0))
            zeros = _sample_zero_cells(rng, k0, total, edge_codes, n)
            # noisy values conditioned on exceeding theta
            v1 = 1.0 + _inverse_survival(_open_uniform(rng, ones.size) * s1, b)
            v0 = _inverse_survival(_open_uniform(rng, zeros.size) * s0, b)
            codes = np.concatenate((ones, zeros))
            vals = np.concatenate((v1, v0))
            if codes.size > m_noisy:
                keep = np.argsort(-vals, kind="stable")[:m_noisy]
                codes = codes[keep]
            chosen = np.sort(codes)
    with run.timed("construct"):
        out = Graph(n, pair_from_index(chosen, n)) if chosen.size else Graph(n)
    run.summaries.update(noisy_m=m_noisy, threshold=float(theta))
    return run.finish(out)
