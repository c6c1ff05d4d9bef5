"""The six edge-DP synthesizers behind one ``generate`` entry point."""

from dataclasses import dataclass, field

from .base import ALGORITHMS, ConfigError, SynthesisRecord, resolve_algorithm
from .dgg import dgg_generate
from .dpdk import dpdk_generate
from .privgraph import privgraph_generate
from .privhrg import privhrg_generate
from .privskg import privskg_generate
from .tmf import tmf_generate

REGISTRY = {
    "DP-dK": dpdk_generate,
    "TmF": tmf_generate,
    "PrivSKG": privskg_generate,
    "PrivHRG": privhrg_generate,
    "PrivGraph": privgraph_generate,
    "DGG": dgg_generate,
}

# stage labels and default fractions, echoed into reports
LEDGER_TEMPLATES = {
    "DP-dK": {"dk": 1.0},
    "TmF": {"edge_count": 0.1, "cells": 0.9},
    "PrivSKG": {"edges": 0.2, "stars": 0.4, "triangles": 0.4},
    "PrivHRG": {"dendrogram": 0.5, "probabilities": 0.5},
    "PrivGraph": {"coarse": 1 / 3, "refine": 1 / 3, "counts": 1 / 3},
    "DGG": {"degrees": 1.0},
}

# algorithms whose default configuration needs delta > 0
NEEDS_DELTA = ("DP-dK", "PrivSKG")


@dataclass
class Synthesizer:
    name: str
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.name = resolve_algorithm(self.name)

    def generate(self, g, budget, seed) -> SynthesisRecord:
        try:
            return REGISTRY[self.name](g, budget, seed, **self.config)
        except TypeError as exc:
            if "unexpected keyword" in str(exc):
                raise ConfigError(f"{self.name}: {exc}") from None
            raise


def generate(alg, g, budget, seed, config=None) -> SynthesisRecord:
    """Run one synthesizer (name or ``Synthesizer``) on ``g``."""
    if not isinstance(alg, Synthesizer):
        alg = Synthesizer(alg, dict(config or {}))
    elif config:
        alg = Synthesizer(alg.name, {**alg.config, **config})
    return alg.generate(g, budget, seed)


__all__ = [
    "ALGORITHMS", "ConfigError", "LEDGER_TEMPLATES", "NEEDS_DELTA", "REGISTRY", "SynthesisRecord",
    "Synthesizer", "generate", "resolve_algorithm",
]
