"""PrivSKG: private moment estimates matched by a stochastic Kronecker model."""

import math

import numpy as np
from scipy.optimize import minimize

from .. import kernels
from ..construct import KroneckerInitiator, sample_kronecker
from ..privacy import PrivacyBudget, laplace_noise, smooth_beta, smooth_noise, smooth_sensitivity_upper_bound
from .base import ConfigError, Run, check_shares

# above this node count the closed-form moments of the full 2^k model are used
EXACT_MOMENT_LIMIT = 512


def graph_moments(g):
    """(edges, 2-stars, triangles)."""
    d = g.degrees.astype(np.float64)
    tri = 0
    if g.m:
        indptr, indices = g.csr
        tri = int(kernels.triangles_per_node(indptr, indices).sum() // 3)
    return float(g.m), float((d * (d - 1) / 2).sum()), float(tri)


def exact_moments(theta, n):
    """Expected moments of the Kronecker model truncated to ``n`` nodes."""
    a, b, c = theta
    levels = KroneckerInitiator.for_nodes(a, b, c, n).levels
    base = np.array([[a, b], [b, c]], dtype=np.float64)
    P = np.ones((1, 1))
    for _ in range(levels):
        P = np.kron(P, base)
    P = np.ascontiguousarray(P[:n, :n])
    np.fill_diagonal(P, 0.0)
    rows = P.sum(axis=1)
    E = P.sum() / 2.0
    H = ((rows * rows - (P * P).sum(axis=1)) / 2.0).sum()
    T = ((P @ P) * P).sum() / 6.0
    return float(E), float(H), float(T)


def closed_form_moments(theta, levels):
    """Expected moments of the full 2^k Kronecker model (self-loops ignored)."""
    a, b, c = theta
    k = levels
    E = 0.5 * ((a + 2 * b + c) ** k - (a + c) ** k)
    H = 0.5 * (((a + b) ** 2 + (b + c) ** 2) ** k - 2 * (a * (a + b) + c * (c + b)) ** k
               - (a * a + 2 * b * b + c * c) ** k + 2 * (a * a + c * c) ** k)
    T = (1.0 / 6.0) * ((a ** 3 + 3 * b * b * (a + c) + c ** 3) ** k
                       - 3 * (a * (a * a + b * b) + c * (b * b + c * c)) ** k
                       + 2 * (a ** 3 + c ** 3) ** k)
    return E, H, T


def fit_initiator(targets, n, rng, starts=3):
    """Bounded derivative-free fit of (a, b, c) to the target moments.

    Returns ``(theta, loss, at_boundary)``.
    """
    targets = np.maximum(np.asarray(targets, dtype=np.float64), 1.0)
    levels = max(1, math.ceil(math.log2(max(n, 2))))
    if n <= EXACT_MOMENT_LIMIT:
        def moments(th):
            return exact_moments(th, n)
    else:
        def moments(th):
            return closed_form_moments(th, levels)

    def loss(th):
        est = np.asarray(moments(np.clip(th, 0.0, 1.0)))
        return float((((est - targets) / targets) ** 2).sum())

    grid = [np.array([0.9, 0.5, 0.2]), np.array([0.99, 0.45, 0.25]), np.array([0.7, 0.7, 0.7])]
    grid += [rng.random(3) for _ in range(max(0, starts - len(grid)))]
    best = None
    for x0 in grid:
        res = minimize(loss, x0, method="Powell", bounds=[(0.0, 1.0)] * 3,
                       options={"xtol": 1e-5, "ftol": 1e-9, "maxfev": 1500})
        if best is None or res.fun < best.fun:
            best = res
        if best.fun < 1e-12:
            break
    theta = np.clip(best.x, 0.0, 1.0)
    at_boundary = bool(((theta < 1e-6) | (theta > 1 - 1e-6)).any())
    return theta, float(best.fun), at_boundary


def star_local_sensitivity(d_max, n):
    # toggling (u, v) changes the 2-star count by d_u + d_v
    return lambda t: 2.0 * min(d_max + t, max(n - 2, 0))


def triangle_local_sensitivity(max_cn, n):
    # toggling (u, v) changes the triangle count by their common neighbours
    return lambda t: float(min(max_cn + t, max(n - 2, 0)))


def privskg_generate(g, budget, seed, shares=(0.2, 0.4, 0.4), starts=3):
    if budget.delta <= 0:
        raise ConfigError("PrivSKG needs delta > 0 for the smooth-sensitivity counts")
    run = Run("PrivSKG", budget, seed, check_shares(shares, ["edges", "stars", "triangles"]))
    n = g.n
    E, H, T = graph_moments(g)
    d_max = int(g.degrees.max()) if n else 0
    indptr, indices = g.csr
    max_cn = int(kernels.max_common_neighbors(indptr, indices)) if g.m else 0
    with run.timed("perturb"):
        st = run.ledger.charge("edges", "Laplace on edge count")
        E_n = E + laplace_noise(1.0, st.epsilon, run.streams("edges"))
        noisy = [E_n]
        for label, local, cap in (("stars", star_local_sensitivity(d_max, n), 2.0 * max(n - 2, 0)),
                                  ("triangles", triangle_local_sensitivity(max_cn, n), float(max(n - 2, 0)))):
            st = run.ledger.charge(label, "smooth-sensitivity Laplace")
            sb = PrivacyBudget(st.epsilon, st.delta)
            bound = smooth_sensitivity_upper_bound(local, smooth_beta(sb.epsilon, sb.delta), t_max=n, cap=cap)
            true = H if label == "stars" else T
            noisy.append(true + smooth_noise(bound, sb, run.streams(label)))
            run.summaries[f"{label}_sensitivity"] = bound.value
        noisy = [max(0.0, float(x)) for x in noisy]
    with run.timed("fit"):
        theta, loss, boundary = fit_initiator(noisy, n, run.streams("fit"), starts)
        if boundary:
            run.warnings.append("initiator fit hit the [0, 1] box boundary; parameters clamped")
    with run.timed("construct"):
        init = KroneckerInitiator.for_nodes(*theta, n)
        out = sample_kronecker(init, n, run.streams("sample"))
    run.summaries.update(noisy_edges=noisy[0], noisy_stars=noisy[1], noisy_triangles=noisy[2],
                         a=float(theta[0]), b=float(theta[1]), c=float(theta[2]), fit_loss=loss)
    return run.finish(out)
