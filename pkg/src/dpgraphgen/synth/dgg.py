"""DGG: Laplace-perturbed degree sequence fed to BTER."""

from ..construct import DEFAULT_TARGET_ACC, construct_bter, repair_degrees
from ..privacy import laplace_noise
from .base import Run, check_shares

# one edge moves two degrees by one each
DEGREE_SENSITIVITY = 2.0


def dgg_generate(g, budget, seed, target_acc=DEFAULT_TARGET_ACC, shares=(1.0,)):
    run = Run("DGG", budget, seed, check_shares(shares, ["degrees"]))
    with run.timed("perturb"):
        stage = run.ledger.charge("degrees", "Laplace on the degree sequence")
        noisy = g.degrees + laplace_noise(DEGREE_SENSITIVITY, stage.epsilon, run.streams("degrees"), g.n)
        degrees = repair_degrees(noisy, g.n)
    with run.timed("construct"):
        out = construct_bter(degrees, target_acc, run.streams("bter"))
    run.summaries.update(degrees=degrees, noisy_degree_sum=int(degrees.sum()), target_acc=target_acc)
    return run.finish(out)
