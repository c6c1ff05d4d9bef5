"""Seeded random streams keyed by labels.

Every randomized stage draws from its own generator derived from a root
seed and a tuple of labels, so reordering stages never shifts another
stage's stream.
"""

import hashlib

import numpy as np


def label_key(*labels) -> int:
    h = hashlib.sha256()
    for lab in labels:
        h.update(repr(lab).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:16], "little")


def derive_seed(root_seed, *labels) -> int:
    """A 64-bit seed deterministically derived from ``root_seed`` and ``labels``."""
    return label_key(int(root_seed), *labels) & ((1 << 63) - 1)


def derive_rng(root_seed, *labels) -> np.random.Generator:
    ss = np.random.SeedSequence([int(root_seed) & ((1 << 64) - 1), label_key(*labels)])
    return np.random.Generator(np.random.PCG64(ss))


class StageStreams:
    """Hands out one generator per stage label for a single synthesis run."""

    def __init__(self, seed):
        self.seed = int(seed)
        self.used: list[str] = []

    def __call__(self, label: str) -> np.random.Generator:
        self.used.append(label)
        return derive_rng(self.seed, "stage", label)
