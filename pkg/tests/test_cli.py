import json
from pathlib import Path

import pytest

from dpgraphgen.cli import main
from dpgraphgen.graph import read_canonical
from dpgraphgen.queries import QueryId
from dpgraphgen.synth import ALGORITHMS

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def k4file(tmp_path):
    p = tmp_path / "k4.txt"
    p.write_text("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
    return p


def test_help_lists_algorithms_and_queries(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for a in ALGORITHMS:
        assert a in out
    for q in QueryId:
        assert q.label in out and q.name in out


def test_generate_dgg_zero_noise(k4file, tmp_path):
    out = tmp_path / "o.txt"
    argv = ["generate", "--alg", "dgg", "--input", str(k4file), "--epsilon", "1e6", "--seed", "7",
            "--output", str(out)]
    assert main(argv) == 0
    side = json.loads(Path(f"{out}.ledger.json").read_text())
    assert side["summaries"]["degrees"] == [3, 3, 3, 3]
    assert side["ledger"]["stages"][0]["epsilon"] == 1e6
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    assert main(argv + ["--set", "target_acc=1"]) == 0
    assert sorted(read_canonical(out).degrees.tolist()) == [3, 3, 3, 3]


def test_generate_requires_delta(k4file, tmp_path, capsys):
    argv = ["generate", "--alg", "dpdk", "--input", str(k4file), "--epsilon", "1", "--seed", "1",
            "--output", str(tmp_path / "x.txt")]
    assert main(argv) == 2
    assert "--delta" in capsys.readouterr().err
    assert main(argv + ["--delta", "0.01"]) == 0


def test_usage_errors(k4file):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--alg", "dgg"])
    assert exc.value.code == 2
    assert main(["generate", "--alg", "nope", "--input", str(k4file), "--epsilon", "1", "--seed", "0"]) == 2
    assert main(["generate", "--alg", "dgg", "--input", "missing.txt", "--epsilon", "1", "--seed", "0"]) == 2
    assert main(["generate", "--alg", "dgg", "--input", str(k4file), "--epsilon", "-1", "--seed", "0"]) == 2
    assert main(["query", "--input", str(k4file), "--query", "nope"]) == 2


def test_query(k4file, capsys, tmp_path):
    assert main(["query", "--input", str(k4file), "--query", "acc"]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert main(["query", "--input", str(k4file), "--query", "triangles"]) == 0
    assert capsys.readouterr().out.strip() == "4"
    dest = tmp_path / "d.csv"
    assert main(["query", "--input", str(k4file), "--query", "Q6", "--output", str(dest)]) == 0
    assert dest.read_text().splitlines() == ["index,fraction", "0,0.0", "1,0.0", "2,0.0", "3,1.0"]
    assert main(["query", "--input", str(k4file), "--query", "Ass"]) == 1


def test_query_builtin(capsys):
    assert main(["query", "--input", "ba300", "--query", "E"]) == 0
    assert capsys.readouterr().out.strip() == "891"


def test_bench_dry_run(tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["bench", "--config", str(ROOT / "configs" / "toy.yaml"), "--dry-run",
                 "--output-dir", str(out)]) == 0
    text = capsys.readouterr().out
    assert "planned syntheses: 8" in text and "planned metric rows: 24" in text
    assert not out.exists()


def test_bench_toy_and_report(tmp_path):
    cfg = tmp_path / "toy.yaml"
    cfg.write_text("seed: 1\nrepetitions: 2\nepsilons: [1, 10]\nalgorithms: [DGG, TmF]\n"
                   "queries: [Q1, Q3, Q11]\ndatasets: [{name: ba300}]\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bench", "--config", str(cfg), "--output-dir", str(a), "--seed", "1"]) == 0
    assert main(["bench", "--config", str(cfg), "--output-dir", str(b), "--seed", "1"]) == 0
    raw = (a / "raw.csv").read_text().splitlines()
    assert len(raw) == 1 + 2 * 2 * 3 * 2
    for name in ("raw.csv", "aggregate.csv", "long.csv"):
        def strip(p):
            rows = [ln.split(",") for ln in p.read_text().splitlines()]
            return [r[:7] + r[9:] if name != "aggregate.csv" else r for r in rows]
        assert strip(a / name) == strip(b / name)
    assert (a / "aggregate.csv").read_bytes() == (b / "aggregate.csv").read_bytes()
    assert main(["report", "--raw", str(a), "--output-dir", str(tmp_path / "re")]) == 0
    assert (tmp_path / "re" / "aggregate.csv").read_bytes() == (a / "aggregate.csv").read_bytes()
    assert main(["report", "--raw", str(tmp_path / "nothing")]) == 2


def test_bench_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("algorithms: [Nope]\nepsilons: [0]\ndatasets: []\n")
    assert main(["bench", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "Nope" in err and "epsilon" in err and "datasets" in err
    assert main(["bench", "--config", str(tmp_path / "none.yaml")]) == 2
