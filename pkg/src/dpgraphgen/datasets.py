"""Dataset descriptors, the YAML manifest and builtin graphs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .graph import Graph, generate_ba, generate_er, load_edge_list

GRAPH_TYPES = ("social", "web", "academic", "traffic", "financial", "technology", "synthetic")

# approximate sizes are checked against a relative tolerance instead of equality
APPROX_TOLERANCE = 0.02


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    source: str
    type_tag: str
    expected_n: int | None = None
    expected_m: int | None = None
    approximate: bool = False
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.type_tag not in GRAPH_TYPES:
            raise ValueError(f"type_tag {self.type_tag!r} not one of {GRAPH_TYPES}")

    @property
    def is_builtin(self) -> bool:
        return self.source.startswith("builtin:")


def two_clique_graph(n: int = 300, bridges: int = 3, seed: int = 0) -> Graph:
    """Two equal cliques joined by ``bridges`` random cross edges."""
    half = n // 2
    iu, ju = np.triu_indices(half, k=1)
    a = np.column_stack((iu, ju))
    iu2, ju2 = np.triu_indices(n - half, k=1)
    b = np.column_stack((iu2, ju2)) + half
    rng = np.random.default_rng(seed)
    cross = np.column_stack((rng.integers(0, half, bridges), rng.integers(half, n, bridges)))
    return Graph(n, np.vstack((a, b, cross)))


def planted_partition(n: int, bridges: int = 3) -> np.ndarray:
    """Community labels matching :func:`two_clique_graph`."""
    return (np.arange(n) >= n // 2).astype(np.int64)


# name -> (factory, descriptor)
BUILTINS = {
    "er10k": DatasetDescriptor("er10k", "builtin:er10k", "synthetic", 10000, 250278, True,
                               {"n": 10000, "m": 250278, "seed": 20240501}),
    "ba10k": DatasetDescriptor("ba10k", "builtin:ba10k", "synthetic", 10000, 49975, False,
                               {"n": 10000, "m_per_node": 5, "seed": 20240502}),
    "twoclique300": DatasetDescriptor("twoclique300", "builtin:twoclique300", "synthetic", 300, None, False,
                                      {"n": 300, "bridges": 3, "seed": 7}),
    "ba300": DatasetDescriptor("ba300", "builtin:ba300", "synthetic", 300, 891, False,
                               {"n": 300, "m_per_node": 3, "seed": 11}),
}


def load_builtin(name: str, **overrides) -> Graph:
    desc = BUILTINS[name]
    p = {**desc.params, **overrides}
    if name.startswith("er"):
        return generate_er(p["n"], p["m"], p["seed"])
    if name.startswith("ba"):
        return generate_ba(p["n"], p["m_per_node"], p["seed"])
    if name.startswith("twoclique"):
        return two_clique_graph(p["n"], p["bridges"], p["seed"])
    raise KeyError(name)


def check_size(desc: DatasetDescriptor, g: Graph) -> list[str]:
    """Sanity-check a loaded graph against the descriptor; returns problems."""
    problems = []
    for label, want, got in (("n", desc.expected_n, g.n), ("m", desc.expected_m, g.m)):
        if want is None:
            continue
        if desc.approximate:
            if abs(got - want) > APPROX_TOLERANCE * want:
                problems.append(f"{desc.name}: {label}={got}, expected ~{want}")
        elif got != want:
            problems.append(f"{desc.name}: {label}={got}, expected {want}")
    return problems


def resolve_path(source: str, base_dir=None) -> Path:
    p = Path(os.path.expanduser(source))
    if not p.is_absolute():
        if base_dir is not None and (Path(base_dir) / p).exists():
            return Path(base_dir) / p
        data_dir = os.environ.get("DPGRAPHGEN_DATA_DIR")
        if data_dir and (Path(data_dir) / p).exists():
            return Path(data_dir) / p
    return p


def load_dataset(desc: DatasetDescriptor, base_dir=None, strict: bool = False) -> Graph:
    if desc.is_builtin:
        g = load_builtin(desc.source.split(":", 1)[1])
    else:
        path = resolve_path(desc.source, base_dir)
        g = load_edge_list(path, mapping_path=None)
    problems = check_size(desc, g)
    if problems and strict:
        raise ValueError("; ".join(problems))
    return g


def descriptor_from_dict(d: dict) -> DatasetDescriptor:
    source = str(d.get("source") or d.get("path") or f"builtin:{d['name']}")
    if source in BUILTINS:
        source = f"builtin:{source}"
    if source.startswith("builtin:"):
        key = source.split(":", 1)[1]
        if key not in BUILTINS:
            raise ValueError(f"unknown builtin dataset {key!r}")
        base = BUILTINS[key]
        return DatasetDescriptor(d.get("name", base.name), source, d.get("type", base.type_tag),
                                 d.get("expected_n", base.expected_n),
                                 d.get("expected_m", base.expected_m),
                                 bool(d.get("approximate", base.approximate)), dict(base.params))
    return DatasetDescriptor(
        name=str(d["name"]),
        source=source,
        type_tag=str(d.get("type", "social")),
        expected_n=d.get("expected_n"),
        expected_m=d.get("expected_m"),
        approximate=bool(d.get("approximate", False)),
    )


def load_manifest(path) -> list[DatasetDescriptor]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    entries = doc.get("datasets", doc if isinstance(doc, list) else [])
    return [descriptor_from_dict(e) for e in entries]


# Sizes as listed for the public graphs; rounded rows are marked approximate.
STANDARD_DATASETS = [
    DatasetDescriptor("Minnesota", "road-minnesota.txt", "traffic", 2600, 3300, True),
    DatasetDescriptor("Facebook", "facebook_combined.txt", "social", 4039, 88234),
    DatasetDescriptor("Wiki-Vote", "Wiki-Vote.txt", "web", 7115, 103689),
    DatasetDescriptor("ca-HepPh", "CA-HepPh.txt", "academic", 12008, 118521),
    DatasetDescriptor("poli-large", "econ-poli-large.txt", "financial", 15600, 17500, True),
    DatasetDescriptor("Gnutella", "p2p-Gnutella25.txt", "technology", 22687, 54705),
    BUILTINS["er10k"],
    BUILTINS["ba10k"],
]
