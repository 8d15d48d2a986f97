"""Command-line entry point: ``dynleiden {sweep,temporal,batch,replay}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .batch import BatchSpec, generate_batch, read_batch, write_batch
from .bench import ALGORITHMS, run_algorithm, run_random_sweep, run_temporal_replay
from .dynamic import DynamicContext
from .graph import GraphError, apply_batch, normalize_batch
from .io import load_graph, load_temporal
from .leiden import LeidenParams, static_leiden
from .report import emit_report

log = logging.getLogger("dynleiden")


def _agg_tolerance(text: str) -> float | None:
    if text.lower() in ("off", "none", "disable", "disabled"):
        return None
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("aggregation tolerance must lie in [0, 1] or be 'off'")
    return value


def _add_engine_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("engine")
    g.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $DYNLEIDEN_THREADS or 1)")
    g.add_argument("--tolerance", type=float, default=1e-2)
    g.add_argument("--tolerance-drop", type=float, default=10.0)
    g.add_argument("--max-iterations", type=int, default=20)
    g.add_argument("--max-passes", type=int, default=10)
    g.add_argument("--aggregation-tolerance", type=_agg_tolerance, default=0.8,
                   help="fraction in [0, 1], or 'off'")
    g.add_argument("--chunk-size-main", type=int, default=2048)
    g.add_argument("--chunk-size-aggregation", type=int, default=None,
                   help="default: 2048 for static, 32 for dynamic runs")
    g.add_argument("--algorithms", nargs="+", default=list(ALGORITHMS),
                   choices=ALGORITHMS, metavar="ALG",
                   help=f"subset of {' '.join(ALGORITHMS)}")
    g.add_argument("--seed", type=int, default=0)


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", default="-", help="report path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="default: from the output suffix, else csv")


def _params(args) -> LeidenParams:
    return LeidenParams(
        tolerance=args.tolerance,
        tolerance_drop=args.tolerance_drop,
        max_iterations=args.max_iterations,
        max_passes=args.max_passes,
        aggregation_tolerance=args.aggregation_tolerance,
        chunk_size_main=args.chunk_size_main,
        chunk_size_aggregation=args.chunk_size_aggregation,
        threads=args.threads,
        seed=args.seed,
    )


def _emit(rows, args) -> None:
    fmt = args.format
    if fmt is None:
        fmt = "json" if str(args.output).endswith(".json") else "csv"
    emit_report(rows, fmt, args.output)
    if args.output != "-":
        log.info("wrote %d rows to %s", len(rows), args.output)


def cmd_sweep(args) -> int:
    g = load_graph(args.graph)
    spec = BatchSpec(0.0, args.insertion_share, args.seed, args.repetitions)
    rows = run_random_sweep(
        g, args.fractions, spec, args.algorithms, _params(args), graph_name=Path(args.graph).stem
    )
    _emit(rows, args)
    return 0


def cmd_temporal(args) -> int:
    stream = load_temporal(args.graph)
    if len(stream) == 0:
        raise GraphError(f"{args.graph} holds no edges")
    rows = run_temporal_replay(
        stream,
        args.batch_fraction,
        args.algorithms,
        _params(args),
        batch_size=args.batch_size,
        batches=args.batches,
        graph_name=Path(args.graph).stem,
    )
    _emit(rows, args)
    return 0


def cmd_batch(args) -> int:
    g = load_graph(args.graph)
    b = generate_batch(g, BatchSpec(args.fraction, args.insertion_share, args.seed))
    write_batch(b, args.output)
    log.info("wrote %d records to %s", len(b), args.output)
    return 0


def cmd_replay(args) -> int:
    g = load_graph(args.graph)
    params = _params(args)
    membership, _ = static_leiden(g, params)
    states = {a: DynamicContext.from_membership(g, membership) for a in args.algorithms}
    rows = []
    for index, path in enumerate(args.batches, 1):
        eff, skipped = normalize_batch(g, read_batch(path))
        g_next = apply_batch(g, eff)
        for alg in args.algorithms:
            _, states[alg], report = run_algorithm(alg, g_next, eff, states[alg], params)
            report.graph = Path(args.graph).stem
            report.batch_index = index
            report.skipped_updates = skipped
            report.seed = args.seed
            rows.append(report)
        g = g_next
    _emit(rows, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynleiden",
        description="Static and dynamic Leiden community detection benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="random batch-size sweep on one graph")
    p.add_argument("graph", help=".mtx file or 'u v [w]' edge list")
    p.add_argument("--fractions", type=float, nargs="+",
                   default=[1e-5, 1e-4, 1e-3, 1e-2, 1e-1], help="batch sizes as fractions of |E|")
    p.add_argument("--insertion-share", type=float, default=0.8)
    p.add_argument("--repetitions", type=int, default=5)
    _add_engine_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("temporal", help="replay a 'u v t' stream in 100 insertion batches")
    p.add_argument("graph", help="temporal edge list")
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--batch-fraction", type=float, help="B as a fraction of the stream length")
    size.add_argument("--batch-size", type=int, help="B in edges")
    p.add_argument("--batches", type=int, default=100)
    _add_engine_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_temporal)

    p = sub.add_parser("batch", help="write a random batch file ('D i j' / 'I i j w')")
    p.add_argument("graph")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--insertion-share", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("replay", help="apply batch files in order, running each algorithm")
    p.add_argument("graph")
    p.add_argument("batches", nargs="+", help="batch files")
    _add_engine_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (GraphError, OSError, ValueError) as exc:
        print(f"dynleiden: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
