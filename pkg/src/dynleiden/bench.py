"""Experiment drivers: random batch sweeps and temporal stream replay.

Both drivers keep graph loading, batch generation and workspace allocation
outside the measured region; every reported modularity and disconnected
count is recomputed from the output membership.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import fields

import numpy as np

from .batch import BatchSpec, generate_batch
from .dynamic import DynamicContext, delta_screening, dynamic_frontier, naive_dynamic
from .graph import BatchUpdate, Graph, apply_batch, build_graph, normalize_batch
from .io import TemporalEdges
from .leiden import LeidenParams, static_leiden
from .quality import audit_connectivity, modularity
from .report import RunReport

__all__ = [
    "ALGORITHMS",
    "mean_rows",
    "run_algorithm",
    "run_random_sweep",
    "run_temporal_replay",
    "summarize_across_graphs",
]

ALGORITHMS = ("static", "nd", "ds", "df")
_DYNAMIC = {"nd": naive_dynamic, "ds": delta_screening, "df": dynamic_frontier}
_TEXT_FIELDS = {"algorithm", "row_type", "graph"}
_TIME_FIELDS = ("time_marking", "time_move", "time_refine", "time_aggregate", "time_total")


def run_algorithm(
    name: str,
    g_t: Graph,
    b: BatchUpdate,
    ctx: DynamicContext | None,
    params: LeidenParams,
) -> tuple[np.ndarray, DynamicContext, RunReport]:
    """Run one algorithm on snapshot ``g_t`` and score the result.

    ``static`` ignores ``b`` and ``ctx`` and starts from singletons; the
    dynamic variants start from ``ctx``, which must describe the snapshot
    before ``b``.
    """
    if name == "static":
        membership, report = static_leiden(g_t, params)
        report.algorithm = "static"
        report.affected_fraction = 1.0
        report.marked_community_fraction = 1.0
        new_ctx = DynamicContext.from_membership(g_t, membership)
    elif name in _DYNAMIC:
        if ctx is None:
            raise ValueError(f"{name} needs the previous state")
        membership, k, sigma, report = _DYNAMIC[name](g_t, b, ctx, params)
        new_ctx = DynamicContext(membership, k, sigma)
    else:
        raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    report.modularity = modularity(g_t, membership)
    report.disconnected_count = len(audit_connectivity(g_t, membership))
    report.community_count = int(len(np.unique(membership)))
    report.batch_size = len(b.insertions) // 2 + len(b.deletions) // 2 if b is not None else 0
    return membership, new_ctx, report


def mean_rows(reports: list[RunReport]) -> list[RunReport]:
    """Arithmetic mean per (graph, algorithm, batch fraction) of the ``run`` rows."""
    groups: dict[tuple, list[RunReport]] = defaultdict(list)
    for r in reports:
        if r.row_type == "run":
            groups[(r.graph, r.algorithm, r.batch_fraction)].append(r)
    out = []
    for (graph, alg, frac), rows in groups.items():
        mean = RunReport(algorithm=alg, row_type="mean", graph=graph, batch_fraction=frac)
        for f in fields(RunReport):
            if f.name in _TEXT_FIELDS or f.name in ("batch_fraction", "repetition", "batch_index"):
                continue
            vals = [getattr(r, f.name) for r in rows]
            if f.name == "iterations":
                continue
            if f.type == "bool":
                setattr(mean, f.name, any(vals))
            else:
                setattr(mean, f.name, float(np.mean(vals)))
        # integer fields that are constant across rows stay integers
        for name in ("threads", "seed", "batch_size"):
            vals = {getattr(r, name) for r in rows}
            if len(vals) == 1:
                setattr(mean, name, vals.pop())
        out.append(mean)
    return out


def summarize_across_graphs(reports: list[RunReport]) -> list[RunReport]:
    """Collapse ``mean`` rows of several graphs: geometric mean for times,
    arithmetic mean for everything else."""
    groups: dict[tuple, list[RunReport]] = defaultdict(list)
    for r in reports:
        if r.row_type == "mean":
            groups[(r.algorithm, r.batch_fraction)].append(r)
    out = []
    for (alg, frac), rows in groups.items():
        agg = mean_rows([_as_run(r) for r in rows])[0]
        agg.graph = "*"
        for name in _TIME_FIELDS:
            vals = np.array([getattr(r, name) for r in rows], dtype=float)
            setattr(agg, name, _geomean(vals))
        out.append(agg)
    return out


def _as_run(r: RunReport) -> RunReport:
    clone = RunReport(**{f.name: getattr(r, f.name) for f in fields(RunReport)})
    clone.row_type = "run"
    clone.graph = "*"
    return clone


def _geomean(vals: np.ndarray) -> float:
    vals = vals[vals > 0]
    return float(math.exp(np.mean(np.log(vals)))) if len(vals) else 0.0


def _check_algorithms(algorithms) -> list[str]:
    algs = [a.lower() for a in algorithms]
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise ValueError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
    return algs


def run_random_sweep(
    g: Graph,
    fractions,
    spec: BatchSpec | None = None,
    algorithms=ALGORITHMS,
    params: LeidenParams | None = None,
    graph_name: str = "",
) -> list[RunReport]:
    """Random batch sweep on one graph.

    The prior state of every dynamic variant is a static run on ``g``.  For
    each fraction and repetition a batch is drawn and applied to ``g``; the
    static algorithm reruns from singletons and each dynamic variant starts
    from the prior state.  Returns the per-run rows followed by one mean row
    per (algorithm, fraction).

    Parameters
    ----------
    g : Graph
        Base snapshot.
    fractions : iterable of float
        Batch sizes as fractions of |E|.
    spec : BatchSpec, optional
        Insertion share, seed and repetitions (``fraction`` is ignored).
    algorithms : iterable of str
        Any of ``static``, ``nd``, ``ds``, ``df``.
    params : LeidenParams, optional
    graph_name : str
        Copied into every row.
    """
    spec = spec or BatchSpec(0.0)
    params = params or LeidenParams()
    algs = _check_algorithms(algorithms)
    base_membership, _ = static_leiden(g, params)
    base_ctx = DynamicContext.from_membership(g, base_membership)

    rows: list[RunReport] = []
    for fi, frac in enumerate(fractions):
        for rep in range(spec.repetitions):
            rng = np.random.default_rng([spec.seed, fi, rep])
            b = generate_batch(
                g, BatchSpec(frac, spec.insertion_share, spec.seed, spec.repetitions), rng
            )
            g_t, skipped = apply_batch(g, b, return_skipped=True)
            for alg in algs:
                _, _, report = run_algorithm(alg, g_t, b, base_ctx, params)
                report.graph = graph_name
                report.batch_fraction = float(frac)
                report.repetition = rep
                report.skipped_updates = skipped
                report.seed = spec.seed
                rows.append(report)
    return rows + mean_rows(rows)


def run_temporal_replay(
    temporal: TemporalEdges,
    batch_fraction: float | None = None,
    algorithms=ALGORITHMS,
    params: LeidenParams | None = None,
    *,
    batch_size: int | None = None,
    batches: int = 100,
    base_share: float = 0.9,
    graph_name: str = "",
) -> list[RunReport]:
    """Replay a temporal stream in insertion-only batches.

    The base snapshot holds the first ``base_share`` of the (time-sorted)
    edges, duplicates collapsed.  Then ``batches`` consecutive batches of
    ``B`` edges each are inserted, ``B`` given directly or as
    ``batch_fraction`` of the stream length.  Aggregation tolerance is
    switched off.  Each dynamic variant carries its own state from batch to
    batch.  Rows are numbered by ``batch_index`` starting at 1.
    """
    algs = _check_algorithms(algorithms)
    params = (params or LeidenParams()).replace(aggregation_tolerance=None)
    n_total = len(temporal)
    if batch_size is None:
        if batch_fraction is None:
            raise ValueError("give batch_fraction or batch_size")
        batch_size = max(1, int(math.floor(batch_fraction * n_total + 0.5)))
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    n = temporal.vertex_count
    cut = int(base_share * n_total)
    base = build_graph(
        np.column_stack([temporal.sources[:cut], temporal.targets[:cut], np.ones(cut)]), n
    )
    remaining = n_total - cut
    if remaining < batch_size * batches:
        usable = remaining // batch_size
        warnings.warn(
            f"only {remaining} edges after the base graph; replaying {usable} "
            f"batches of {batch_size} instead of {batches}",
            RuntimeWarning,
            stacklevel=2,
        )
        batches = usable

    membership, _ = static_leiden(base, params)
    states = {a: DynamicContext.from_membership(base, membership) for a in algs}
    g = base
    rows: list[RunReport] = []
    for bi in range(batches):
        lo = cut + bi * batch_size
        u = temporal.sources[lo: lo + batch_size]
        v = temporal.targets[lo: lo + batch_size]
        raw = BatchUpdate(
            insertions=np.concatenate([np.column_stack([u, v]), np.column_stack([v, u])]),
            insertion_weights=np.ones(2 * len(u)),
        )
        eff, skipped = normalize_batch(g, raw)
        g_next = apply_batch(g, eff)
        for alg in algs:
            _, states[alg], report = run_algorithm(alg, g_next, eff, states[alg], params)
            report.graph = graph_name
            report.batch_index = bi + 1
            report.batch_fraction = batch_size / n_total if n_total else 0.0
            report.batch_size = batch_size
            report.skipped_updates = skipped
            report.seed = params.seed
            rows.append(report)
        g = g_next
    return rows
