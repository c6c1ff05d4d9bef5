"""DP-dK: noisy dK-2 joint degree matrix (default) or dK-1 degree histogram."""

import numpy as np

from ..construct import (JointDegreeMatrix, construct_dk2, construct_havel_hakimi,
                         joint_degree_matrix, repair_degrees)
from ..privacy import (PrivacyBudget, SensitivityBound, laplace_noise, smooth_beta,
                       smooth_noise, smooth_sensitivity_upper_bound)
from .base import ConfigError, Run, check_shares

# one edge moves two nodes between adjacent histogram bins
HISTOGRAM_SENSITIVITY = 4.0


def jdm_local_sensitivity(d_max: int, n: int):
    """Local-sensitivity envelope of the joint degree matrix at distance t.

    Toggling edge (u, v) moves the other edges of u and v to new cells and
    adds or removes one cell entry, so the L1 change is at most
    2 d_u + 2 d_v + 1 <= 4 d_max + 1. At distance t the maximum degree is at
    most d_max + t (and never above n - 1).
    """
    def local(t):
        return 4.0 * min(d_max + t, max(n - 1, 0)) + 1.0
    return local


def clamp_preserving_total(noisy) -> np.ndarray:
    """Non-negative integers whose sum is the rounded noisy total.

    Clamping each cell at zero alone biases the total upward by roughly
    half the noise scale per cell; instead the positive part is rescaled to
    the (unbiased) noisy sum and rounded by largest remainder.
    """
    noisy = np.asarray(noisy, dtype=np.float64)
    target = int(max(0, round(float(noisy.sum()))))
    pos = np.maximum(noisy, 0.0)
    if target == 0 or pos.sum() == 0:
        return np.zeros(noisy.shape, dtype=np.int64)
    scaled = pos * (target / pos.sum())
    out = np.floor(scaled).astype(np.int64)
    short = target - int(out.sum())
    if short > 0:
        order = np.argsort(-(scaled - out), kind="stable")
        out[order[:short]] += 1
    return out


def _perturb_dk2(g, run, stage_budget, rng, noise, domain):
    jdm = joint_degree_matrix(g)
    n = g.n
    d_max = int(g.degrees.max()) if n else 0
    if domain == "support":
        cells = sorted(jdm.counts)
        run.warnings.append("dK-2 noise added to the support of the true JDM only")
    elif domain == "full":
        cells = [(a, b) for a in range(1, d_max + 1) for b in range(a, d_max + 1)]
    else:
        raise ConfigError(f"unknown dK-2 domain {domain!r}")
    true = np.array([jdm.counts.get(c, 0) for c in cells], dtype=np.float64)
    if noise == "smooth":
        beta = smooth_beta(stage_budget.epsilon, stage_budget.delta)
        bound = smooth_sensitivity_upper_bound(jdm_local_sensitivity(d_max, n), beta, t_max=n,
                                               cap=4.0 * max(n - 1, 0) + 1.0)
        noisy = true + smooth_noise(bound, stage_budget, rng, len(cells))
        sens = bound.value
    elif noise == "laplace":
        sens = 4.0 * max(n - 1, 0) + 1.0
        noisy = true + laplace_noise(SensitivityBound.global_(sens), stage_budget.epsilon, rng, len(cells))
    else:
        raise ConfigError(f"unknown noise mode {noise!r}")
    counts = clamp_preserving_total(noisy)
    return JointDegreeMatrix(dict(zip(cells, counts.tolist()))), sens


def dpdk_generate(g, budget, seed, mode="dk2", noise="smooth", domain="support", shares=(1.0,),
                  swap_factor=10):
    if mode not in ("dk2", "dk1"):
        raise ConfigError(f"unknown DP-dK mode {mode!r}")
    if mode == "dk2" and noise == "smooth" and budget.delta <= 0:
        raise ConfigError("DP-dK with smooth sensitivity needs delta > 0")
    run = Run("DP-dK", budget, seed, check_shares(shares, ["dk"]))
    rng = run.streams("dk")
    n = g.n
    if mode == "dk2":
        with run.timed("perturb"):
            st = run.ledger.charge("dk", f"{noise} noise on joint degree matrix cells")
            noisy, sens = _perturb_dk2(g, run, PrivacyBudget(st.epsilon, st.delta), rng, noise, domain)
        with run.timed("construct"):
            out, rep = construct_dk2(noisy, run.streams("construct"), n=n, swap_factor=swap_factor,
                                     return_report=True)
        if not rep.feasible:
            run.warnings.append(f"dK-2 construction dropped {rep.unresolved} unrepairable edges")
        run.summaries.update(noisy_m=noisy.m, sensitivity=float(sens), jdm=noisy,
                             unresolved=rep.unresolved)
    else:
        with run.timed("perturb"):
            st = run.ledger.charge("dk", "Laplace on the degree histogram")
            hist = np.bincount(g.degrees, minlength=max(n, 1)).astype(np.float64)
            noisy = hist + laplace_noise(HISTOGRAM_SENSITIVITY, st.epsilon, rng, hist.size)
            noisy = np.maximum(np.rint(noisy), 0).astype(np.int64)
            seq = np.repeat(np.arange(noisy.size), noisy)
            n_out = max(int(seq.size), n)
            seq = np.concatenate((seq, np.zeros(n_out - seq.size, dtype=np.int64)))
            seq = repair_degrees(seq, n_out)
        with run.timed("construct"):
            out = construct_havel_hakimi(seq, best_effort=True)
        run.summaries.update(histogram=noisy, noisy_m=int(seq.sum() // 2))
    run.summaries["nodes"] = out.n
    return run.finish(out)
