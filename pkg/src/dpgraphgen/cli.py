"""Command-line front end: generate, query, bench and report."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, harness
from .datasets import BUILTINS, load_builtin
from .graph import load_edge_list, write_edge_list
from .privacy import PrivacyBudget
from .queries import QueryError, QueryId, evaluate, resolve_query
from .synth import ALGORITHMS, NEEDS_DELTA, ConfigError, generate, resolve_algorithm

OUTPUT_ENV = "DPGRAPHGEN_OUTPUT_DIR"
EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("dpgraphgen")


class UsageError(Exception):
    pass


def _epilog() -> str:
    queries = "\n".join(f"  {q.name:<4} {q.label:<7} {q.category}" for q in QueryId)
    return (f"algorithms:\n  {', '.join(ALGORITHMS)}\n\nqueries:\n{queries}\n\n"
            f"environment:\n  {OUTPUT_ENV}  default output directory")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or ".")


def read_graph(spec: str):
    """An edge-list path, or ``builtin:<name>`` / a bare builtin name."""
    name = spec.split(":", 1)[1] if spec.startswith("builtin:") else spec
    if name in BUILTINS and not Path(spec).exists():
        return load_builtin(name)
    if not Path(spec).exists():
        raise UsageError(f"input {spec!r} not found")
    return load_edge_list(spec)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _alg_options(pairs) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise UsageError(f"--set expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = _parse_value(v)
    return out


# ---------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    try:
        alg = resolve_algorithm(args.alg)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    options = _alg_options(args.set)
    # dk1 mode and laplace noise run under pure DP; everything else here needs delta
    pure_ok = alg == "DP-dK" and (options.get("mode") == "dk1" or options.get("noise") == "laplace")
    if alg in NEEDS_DELTA and args.delta is None and not pure_ok:
        raise UsageError(f"--delta is required for {alg}")
    try:
        budget = PrivacyBudget(args.epsilon, args.delta or 0.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    g = read_graph(args.input)
    rec = generate(alg, g, budget, args.seed, options)
    out = Path(args.output) if args.output else (
        default_output_dir() / f"{alg}_{Path(args.input).stem}_eps{args.epsilon:g}_seed{args.seed}.txt")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(rec.output, out)
    side = rec.to_dict()
    side.pop("timings", None)   # keep the sidecar reproducible
    side.update({"input": str(args.input), "seed": args.seed, "config": options,
                 "epsilon": args.epsilon, "delta": args.delta or 0.0, "version": __version__})
    with open(f"{out}.ledger.json", "w", encoding="utf-8") as fh:
        json.dump(harness._jsonable(side), fh, indent=2, default=str)
        fh.write("\n")
    print(f"{out}  n={rec.output.n} m={rec.output.m}")
    for w in rec.warnings:
        log.warning(w)
    return EXIT_OK


def _format_scalar(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def cmd_query(args) -> int:
    try:
        q = resolve_query(args.query)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    g = read_graph(args.input)
    try:
        v = evaluate(q, g, args.seed)
    except QueryError as exc:
        print(f"{q.name} ({q.label}) undefined: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for f in v.flags:
        log.warning("%s: %s", q.label, f)
    if v.kind == "scalar":
        print(_format_scalar(v.value))
        return EXIT_OK
    header = {"distribution": ("index", "fraction"), "partition": ("node", "community"),
              "scores": ("node", "score")}[v.kind]
    arr = np.asarray(v.value)
    lines = [",".join(header)] + [f"{i},{_format_scalar(x) if v.kind == 'partition' else repr(float(x))}"
                                  for i, x in enumerate(arr.tolist())]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(args.output)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_run_config(args) -> harness.RunConfig:
    overrides = {"seed": args.seed, "workers": args.workers, "output_dir": args.output_dir}
    try:
        cfg = harness.load_config(args.config, overrides)
    except FileNotFoundError:
        raise UsageError(f"config {args.config!r} not found") from None
    if args.no_memory:
        cfg.track_memory = False
    return cfg


def cmd_bench(args) -> int:
    cfg = _load_run_config(args)
    grid = cfg.grid
    planned = grid.synthesis_count
    if args.dry_run:
        print(f"planned syntheses: {planned}")
        print(f"planned metric rows: {planned * len(grid.queries)}")
        print(f"algorithms: {', '.join(grid.algorithm_names)}")
        print(f"datasets: {', '.join(grid.dataset_names)}")
        print(f"epsilons: {', '.join(f'{e:g}' for e in grid.epsilons)}")
        print(f"output: {cfg.output_dir} (not written)")
        return EXIT_OK

    def progress(done, total, cell):
        log.info("[%d/%d] %s %s eps=%g rep=%d %s %.2fs", done, total, cell.algorithm, cell.dataset,
                 cell.epsilon, cell.repetition, cell.status, cell.wall_s)

    cells, _, table, files = harness.run_and_report(cfg, progress)
    failed = sum(c.status != "ok" for c in cells)
    print(harness.summarize(table))
    print(f"\n{len(cells)} syntheses ({failed} failed); report in {cfg.output_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.raw)
    if path.is_dir():
        path = path / "raw.csv"
    if not path.exists():
        raise UsageError(f"raw CSV {str(path)!r} not found")
    rows = harness.read_raw_csv(path)
    agg = harness.aggregate_means(rows)
    table = harness.best_counts(agg, tie_tol=args.tie_tol, unique_winner=args.unique_winner)
    out = Path(args.output_dir) if args.output_dir else path.parent
    harness.write_report(None, agg, table, out, None,
                         {"source_raw": str(path), "unique_winner": args.unique_winner,
                          "invariant_problems": harness.check_best_count_invariants(table)})
    print(harness.summarize(table))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="dpgraphgen", description="Edge-DP synthetic graph benchmark.",
                                epilog=_epilog(), formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize one graph", epilog=_epilog(), formatter_class=fmt)
    g.add_argument("--alg", required=True, help="algorithm name (see list below)")
    g.add_argument("--input", required=True, help="edge-list file or builtin dataset name")
    g.add_argument("--epsilon", required=True, type=float)
    g.add_argument("--seed", required=True, type=int)
    g.add_argument("--delta", type=float, default=None, help="required for DP-dK and PrivSKG")
    g.add_argument("--output", help="output edge list (default: <output dir>/<alg>_<input>_eps<e>_seed<s>.txt)")
    g.add_argument("--set", action="append", metavar="KEY=VALUE", help="algorithm option, JSON-valued")
    g.set_defaults(func=cmd_generate)

    q = sub.add_parser("query", help="evaluate one query", epilog=_epilog(), formatter_class=fmt)
    q.add_argument("--input", required=True)
    q.add_argument("--query", required=True, help="Q1..Q15 or a label/name")
    q.add_argument("--seed", type=int, default=0, help="community detection seed")
    q.add_argument("--output", help="CSV path for non-scalar results")
    q.set_defaults(func=cmd_query)

    b = sub.add_parser("bench", help="run a config-driven experiment grid", epilog=_epilog(),
                       formatter_class=fmt)
    b.add_argument("--config", required=True)
    b.add_argument("--seed", type=int, default=None, help="override the root seed")
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--output-dir", default=None, help=f"report directory (default from config or ${OUTPUT_ENV})")
    b.add_argument("--dry-run", action="store_true", help="print the plan, write nothing")
    b.add_argument("--no-memory", action="store_true", help="skip allocation tracking")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="re-aggregate an existing raw CSV", epilog=_epilog(), formatter_class=fmt)
    r.add_argument("--raw", required=True, help="raw.csv or the directory holding it")
    r.add_argument("--output-dir", default=None)
    r.add_argument("--tie-tol", type=float, default=harness.TIE_TOL)
    r.add_argument("--unique-winner", action="store_true", help="credit only the first tied algorithm")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
