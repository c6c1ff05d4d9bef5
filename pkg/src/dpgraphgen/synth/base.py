"""Common plumbing for the synthesizers: records, timers and the registry."""

from __future__ import annotations

import re
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph
from ..privacy import BudgetLedger, PrivacyBudget, split_budget
from ..rng import StageStreams


# short per-node arrays (e.g. repaired degrees) are echoed in sidecars
SUMMARY_ARRAY_LIMIT = 10000


class ConfigError(ValueError):
    """Unknown algorithm or invalid algorithm configuration."""


@dataclass
class SynthesisRecord:
    algorithm: str
    output: Graph
    ledger: BudgetLedger
    timings: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        simple = {}
        for k, v in self.summaries.items():
            if isinstance(v, (int, float, str, bool)):
                simple[k] = v
            elif isinstance(v, np.ndarray) and v.ndim == 1 and v.size <= SUMMARY_ARRAY_LIMIT:
                simple[k] = v.tolist()
        return {
            "algorithm": self.algorithm,
            "n": self.output.n,
            "m": self.output.m,
            "ledger": self.ledger.to_dict(),
            "timings": dict(self.timings),
            "summaries": simple,
            "warnings": list(self.warnings),
        }


class Run:
    """Per-call state: ledger, stage RNG streams, timings and notes."""

    def __init__(self, name, budget: PrivacyBudget, seed, shares):
        self.name = name
        self.budget = budget
        self.ledger = split_budget(budget, shares)
        self.streams = StageStreams(seed)
        self.timings: dict[str, float] = {}
        self.summaries: dict = {}
        self.warnings: list[str] = []

    def stage_budget(self, label) -> PrivacyBudget:
        s = self.ledger[label]
        return PrivacyBudget(s.epsilon, s.delta)

    @contextmanager
    def timed(self, label):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[label] = self.timings.get(label, 0.0) + time.perf_counter() - t0

    def finish(self, output: Graph) -> SynthesisRecord:
        if not self.ledger.balanced():
            raise AssertionError(f"{self.name}: ledger does not sum to the input budget")
        return SynthesisRecord(self.name, output, self.ledger, self.timings, self.summaries, self.warnings)


def check_shares(shares, labels):
    shares = list(shares)
    if len(shares) != len(labels):
        raise ConfigError(f"expected {len(labels)} budget fractions, got {len(shares)}")
    if any(not float(f) > 0 for f in shares):
        raise ConfigError("budget fractions must be positive")
    if abs(sum(float(f) for f in shares) - 1.0) > 1e-9:
        raise ConfigError(f"budget fractions {shares} do not sum to 1")
    return list(zip(labels, [float(f) for f in shares]))


ALGORITHMS = ("DP-dK", "TmF", "PrivSKG", "PrivHRG", "PrivGraph", "DGG")


def _squash(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


_ALIASES = {_squash(a): a for a in ALGORITHMS}
_ALIASES.update({"dk": "DP-dK", "dp2k": "DP-dK", "skg": "PrivSKG", "hrg": "PrivHRG"})


def resolve_algorithm(name: str) -> str:
    try:
        return _ALIASES[_squash(str(name))]
    except KeyError:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None
