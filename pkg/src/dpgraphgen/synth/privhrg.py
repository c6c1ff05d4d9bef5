"""PrivHRG: dendrogram sampled by MCMC under the exponential mechanism,
then Laplace-perturbed connection probabilities."""

import math

import numpy as np

from .. import kernels
from ..construct import Dendrogram, sample_from_dendrogram
from ..privacy import laplace_noise
from .base import ConfigError, Run, check_shares

MAX_STEPS = 1_000_000
STEPS_PER_NODE_LOG = 200
MIN_GAIN = 1e-6


def loglik_sensitivity(n: int) -> float:
    """Bound on the change of the HRG log-likelihood when one edge is toggled.

    A single term e ln p + (N - e) ln(1 - p) moves by at most N h(1/N), h
    the binary entropy in nats, and N is largest for the root split.
    """
    N = (n // 2) * ((n + 1) // 2)
    if N <= 1:
        return 1.0
    q = 1.0 / N
    return N * (-q * math.log(q) - (1 - q) * math.log1p(-q))


def step_cap(n: int) -> int:
    return int(min(MAX_STEPS, STEPS_PER_NODE_LOG * n * math.ceil(math.log2(max(n, 2)))))


def initial_state(g, rng):
    """Random balanced dendrogram plus its sizes and internal edge counts."""
    n = g.n
    d = Dendrogram.random_balanced(n, rng)
    size = d.sizes()
    depth = d.depths()
    e = kernels.hrg_edge_counts(np.ascontiguousarray(g.edges[:, 0]), np.ascontiguousarray(g.edges[:, 1]),
                                d.parent, depth, 2 * n - 1)
    return d, size, np.asarray(e, dtype=np.int64)


def sample_dendrogram(g, epsilon, rng, max_steps=None, backend=None):
    """Run the chain; returns ``(dendrogram, e, info)`` with ``e`` the true
    edge counts per internal node of the final tree."""
    n = g.n
    kern = backend or kernels
    d, size, e = initial_state(g, rng)
    delta_l = loglik_sensitivity(n)
    factor = epsilon / (2.0 * delta_l)
    loglik = kern.hrg_loglik(e, d.left, d.right, size, n)
    steps = step_cap(n) if max_steps is None else int(max_steps)
    info = {"delta_l": delta_l, "factor": factor, "cap": steps, "steps": 0, "plateau": True,
            "trace": np.empty(0), "loglik": loglik}
    if n < 3 or steps == 0:
        return d, e, info
    # moves 0/1 swap subtrees, 2/3 prune and regraft
    picks = rng.integers(0, 2 * n - 1, size=steps, dtype=np.int64)
    targets = rng.integers(0, 2 * n - 1, size=steps, dtype=np.int64)
    moves = rng.integers(0, 4, size=steps, dtype=np.int64)
    uniforms = rng.random(steps)
    indptr, indices = g.csr
    left, right, parent = d.left.copy(), d.right.copy(), d.parent.copy()
    done, loglik, trace = kern.hrg_mcmc(indptr, indices, left, right, parent, size, e, picks, targets,
                                        moves, uniforms, factor, loglik, n, n, MIN_GAIN)
    d = Dendrogram(n, left, right, parent, np.zeros(2 * n - 1))
    info.update(steps=int(done), plateau=bool(done < steps), trace=np.asarray(trace), loglik=float(loglik))
    return d, e, info


def privhrg_generate(g, budget, seed, shares=(0.5, 0.5), max_steps=None):
    if g.n < 2:
        raise ConfigError("PrivHRG needs at least two nodes")
    run = Run("PrivHRG", budget, seed, check_shares(shares, ["dendrogram", "probabilities"]))
    n = g.n
    with run.timed("mcmc"):
        st1 = run.ledger.charge("dendrogram", "exponential mechanism via MCMC over dendrograms")
        d, e, info = sample_dendrogram(g, st1.epsilon, run.streams("dendrogram"), max_steps)
    if not info["plateau"]:
        run.warnings.append(f"MCMC step cap {info['cap']} reached before the likelihood plateaued")
    with run.timed("perturb"):
        st2 = run.ledger.charge("probabilities", "Laplace on internal-node edge counts")
        size = d.sizes()
        internal = np.arange(n, 2 * n - 1)
        pairs = size[d.left[internal]] * size[d.right[internal]]
        noisy = e[internal] + laplace_noise(1.0, st2.epsilon, run.streams("probabilities"), internal.size)
        noisy = np.clip(np.rint(noisy), 0, pairs)
        prob = np.zeros(2 * n - 1)
        prob[internal] = noisy / pairs
        d.prob = prob
    with run.timed("construct"):
        out = sample_from_dendrogram(d, run.streams("sample"))
    run.summaries.update(mcmc_steps=info["steps"], mcmc_loglik=info["loglik"], plateau=info["plateau"],
                         loglik_sensitivity=info["delta_l"], trace=info["trace"], dendrogram=d)
    return run.finish(out)
