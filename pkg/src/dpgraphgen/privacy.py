"""Randomized mechanisms, sensitivity bounds and budget accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FRACTION_TOL = 1e-12
_TWO53 = float(1 << 53)


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    @property
    def pure(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True)
class SensitivityBound:
    kind: str
    value: float
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("global", "smooth"):
            raise ValueError("kind must be 'global' or 'smooth'")
        if self.value < 0:
            raise ValueError("sensitivity must be non-negative")
        if (self.beta is not None) != (self.kind == "smooth"):
            raise ValueError("beta is required for smooth bounds and forbidden for global ones")
        if self.beta is not None and self.beta < 0:
            raise ValueError("beta must be non-negative")

    @classmethod
    def global_(cls, value: float) -> "SensitivityBound":
        return cls("global", float(value))


@dataclass
class Stage:
    label: str
    epsilon: float
    delta: float
    # what was released with this share; filled by the synthesizer
    note: str = ""
    charged: int = 0


@dataclass
class BudgetLedger:
    total: PrivacyBudget
    stages: list[Stage] = field(default_factory=list)

    def __getitem__(self, label: str) -> Stage:
        for s in self.stages:
            if s.label == label:
                return s
        raise KeyError(label)

    def charge(self, label: str, note: str = "") -> Stage:
        """Record one randomized release against ``label`` and return its share."""
        s = self[label]
        s.charged += 1
        if note and note not in s.note:
            s.note = f"{s.note}; {note}" if s.note else note
        return s

    @property
    def epsilon_spent(self) -> float:
        return math.fsum(s.epsilon for s in self.stages)

    @property
    def delta_spent(self) -> float:
        return math.fsum(s.delta for s in self.stages)

    def balanced(self) -> bool:
        return (abs(self.epsilon_spent - self.total.epsilon) <= FRACTION_TOL * max(1.0, self.total.epsilon)
                and self.delta_spent <= self.total.delta + FRACTION_TOL)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.total.epsilon,
            "delta": self.total.delta,
            "stages": [
                {"label": s.label, "epsilon": s.epsilon, "delta": s.delta, "charged": s.charged, "note": s.note}
                for s in self.stages
            ],
        }


def split_budget(total: PrivacyBudget, shares) -> BudgetLedger:
    """Sequential-composition split of ``total`` by ``(label, fraction)`` pairs.

    The last stage absorbs floating-point residue so the epsilon shares sum
    to the total exactly.
    """
    shares = list(shares)
    if not shares:
        raise ValueError("at least one stage is required")
    labels = [lab for lab, _ in shares]
    if len(set(labels)) != len(labels):
        raise ValueError("stage labels must be unique")
    fracs = [float(f) for _, f in shares]
    if any(not f > 0 for f in fracs):
        raise ValueError("fractions must be positive")
    if abs(math.fsum(fracs) - 1.0) > FRACTION_TOL:
        raise ValueError(f"fractions sum to {math.fsum(fracs)!r}, not 1")
    eps = [f * total.epsilon for f in fracs]
    dels = [f * total.delta for f in fracs]
    eps[-1] = total.epsilon - math.fsum(eps[:-1])
    dels[-1] = max(0.0, total.delta - math.fsum(dels[:-1]))
    return BudgetLedger(total, [Stage(lab, e, d) for lab, e, d in zip(labels, eps, dels)])


def _open_uniform(rng: np.random.Generator, size=None):
    # 53 random bits mapped to the open interval (0, 1)
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / _TWO53


def laplace_scale(sensitivity: float, epsilon: float) -> float:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return float(sensitivity) / float(epsilon)


def laplace_samples(scale: float, rng: np.random.Generator, size=None):
    """Inverse-CDF Laplace(0, scale) draws."""
    if scale < 0:
        raise ValueError("scale must be non-negative")
    u = _open_uniform(rng, size) - 0.5
    x = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    if scale == 0:
        x = np.zeros_like(u) if size is not None else 0.0
    return x if size is not None else float(x)


def laplace_noise(sensitivity: SensitivityBound | float, epsilon: float, rng: np.random.Generator, size=None):
    """Laplace mechanism noise with scale ``sensitivity / epsilon``."""
    value = sensitivity.value if isinstance(sensitivity, SensitivityBound) else float(sensitivity)
    if isinstance(sensitivity, SensitivityBound) and sensitivity.kind != "global":
        raise ValueError("laplace_noise expects a global sensitivity bound")
    return laplace_samples(laplace_scale(value, epsilon), rng, size)


def smooth_beta(epsilon: float, delta: float) -> float:
    """Smoothing parameter for Laplace admissible noise: ``eps / (2 ln(2/delta))``."""
    if not delta > 0:
        raise ValueError("smooth-sensitivity calibration needs delta > 0")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return epsilon / (2.0 * math.log(2.0 / delta))


def smooth_noise(bound: SensitivityBound, budget: PrivacyBudget, rng: np.random.Generator, size=None):
    """Laplace noise with scale ``2 S / eps`` for a beta-smooth upper bound ``S``.

    Satisfies (eps, delta)-DP when ``bound.beta`` does not exceed
    ``smooth_beta(eps, delta)``.
    """
    if bound.kind != "smooth":
        raise ValueError("smooth_noise expects a smooth sensitivity bound")
    beta = smooth_beta(budget.epsilon, budget.delta)
    if bound.beta > beta * (1 + 1e-12):
        raise ValueError(f"bound computed with beta={bound.beta} exceeds calibrated beta={beta}")
    return laplace_samples(2.0 * bound.value / budget.epsilon, rng, size)


def smooth_sensitivity_upper_bound(local_fn, beta: float, t_max: int, cap: float | None = None) -> SensitivityBound:
    """``max_t local_fn(t) e^{-beta t}`` over ``t = 0..t_max``.

    ``local_fn(t)`` must upper-bound the local sensitivity of every graph at
    distance ``t``. If ``cap`` bounds ``local_fn`` everywhere, distances past
    ``t_max`` contribute at most ``cap e^{-beta (t_max + 1)}``, which is
    folded in.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    best = 0.0
    for t in range(int(t_max) + 1):
        best = max(best, float(local_fn(t)) * math.exp(-beta * t))
    if cap is not None and beta > 0:
        best = max(best, float(cap) * math.exp(-beta * (t_max + 1)))
    elif cap is not None:
        best = max(best, float(cap))
    return SensitivityBound("smooth", best, float(beta))


def exponential_select(candidates, quality, delta_q: float, epsilon: float, rng: np.random.Generator):
    """Exponential mechanism via Gumbel-max.

    ``quality`` is either a sequence of scores aligned with ``candidates`` or
    a callable mapping a candidate to its score.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to select from")
    if not delta_q > 0:
        raise ValueError("delta_q must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if callable(quality):
        scores = np.array([quality(c) for c in candidates], dtype=np.float64)
    else:
        scores = np.asarray(quality, dtype=np.float64)
        if scores.shape != (len(candidates),):
            raise ValueError("one score per candidate is required")
    return candidates[exponential_index(scores, delta_q, epsilon, rng)]


def exponential_index(scores, delta_q: float, epsilon: float, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to ``exp(eps q / (2 delta_q))``."""
    logits = (epsilon / (2.0 * delta_q)) * np.asarray(scores, dtype=np.float64)
    logits = logits - logits.max()
    gumbel = -np.log(-np.log(_open_uniform(rng, logits.shape[0])))
    return int(np.argmax(logits + gumbel))


def exponential_probabilities(scores, delta_q: float, epsilon: float) -> np.ndarray:
    """Closed-form selection probabilities of the exponential mechanism."""
    logits = (epsilon / (2.0 * delta_q)) * np.asarray(scores, dtype=np.float64)
    w = np.exp(logits - logits.max())
    return w / w.sum()
