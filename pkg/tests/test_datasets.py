import pytest

from dpgraphgen.datasets import (BUILTINS, GRAPH_TYPES, STANDARD_DATASETS, DatasetDescriptor, check_size,
                                 load_builtin, load_dataset, load_manifest, planted_partition)
from dpgraphgen.graph import Graph


def test_descriptor_types():
    assert len(GRAPH_TYPES) == 7
    with pytest.raises(ValueError):
        DatasetDescriptor("x", "x.txt", "biology")
    assert len(STANDARD_DATASETS) == 8


def test_builtin_sizes():
    assert load_dataset(BUILTINS["ba300"]).m == 891
    g = load_builtin("twoclique300")
    assert g.n == 300 and g.m == 2 * (150 * 149 // 2) + 3
    assert planted_partition(300).sum() == 150


@pytest.mark.slow
def test_ten_thousand_node_builtins():
    er = load_builtin("er10k")
    assert check_size(BUILTINS["er10k"], er) == []
    assert load_builtin("ba10k").m == 49975


def test_size_checks():
    exact = DatasetDescriptor("a", "a.txt", "social", 3, 2)
    assert check_size(exact, Graph(3, [(0, 1), (1, 2)])) == []
    assert check_size(exact, Graph(3, [(0, 1)]))
    approx = DatasetDescriptor("b", "b.txt", "traffic", 2600, 3300, True)
    assert check_size(approx, Graph(2640, [(i, i + 1) for i in range(2639)])) != []
    assert check_size(approx, Graph(2650, [(i, i + 1) for i in range(2649)] + [(0, j) for j in range(2, 650)])) == []


def test_manifest(tmp_path):
    (tmp_path / "g.txt").write_text("0 1\n1 2\n")
    m = tmp_path / "m.yaml"
    m.write_text("datasets:\n  - {name: tiny, source: g.txt, type: web, expected_n: 3, expected_m: 2}\n"
                 "  - {name: ba300}\n")
    descs = load_manifest(m)
    assert [d.name for d in descs] == ["tiny", "ba300"]
    assert load_dataset(descs[0], tmp_path, strict=True).m == 2
    assert descs[1].is_builtin
