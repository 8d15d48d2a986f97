"""Dynamic-supporting parallel Leiden engine.

One pass is: local-moving, subset renumbering, snapshot of community bounds,
breaking of changed communities, refinement, then (unless converged)
aggregation of the refined communities into super-vertices.  The first pass
starts from the previous snapshot's communities and only reprocesses what
the caller's hooks mark as affected; later passes process every
super-vertex and refine every community.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from ._parallel import parallel_scope, resolve_threads
from .graph import BatchUpdate, Graph, total_edge_weight
from .report import PhaseTimer, RunReport

__all__ = [
    "AffectedHooks",
    "CommunityState",
    "Dendrogram",
    "LeidenParams",
    "break_changed_communities",
    "changed_communities",
    "dendrogram_lookup",
    "leiden",
    "leiden_aggregate",
    "leiden_move",
    "leiden_refine",
    "leiden_subset_renumber",
    "scan_bounded",
    "scan_communities",
    "static_leiden",
]

STATIC_AGGREGATION_CHUNK = 2048
DYNAMIC_AGGREGATION_CHUNK = 32


@dataclass(frozen=True)
class LeidenParams:
    """Tuning knobs of the engine.

    ``aggregation_tolerance`` stops the pass loop once the refined
    communities number more than that fraction of the current vertices;
    ``None`` (or 1) disables the check.  ``chunk_size_aggregation=None``
    picks 2048 for static runs and 32 for the dynamic variants.  ``seed`` is
    recorded in reports and drives batch generation; the engine itself is
    deterministic.
    """

    tolerance: float = 1e-2
    tolerance_drop: float = 10.0
    max_iterations: int = 20
    max_passes: int = 10
    aggregation_tolerance: float | None = 0.8
    chunk_size_main: int = 2048
    chunk_size_aggregation: int | None = None
    threads: int | None = 1
    seed: int = 0
    debug: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.tolerance_drop > 1:
            raise ValueError("tolerance_drop must be > 1")
        if self.max_iterations < 1 or self.max_passes < 1:
            raise ValueError("max_iterations and max_passes must be >= 1")
        if self.chunk_size_main < 1 or (
            self.chunk_size_aggregation is not None and self.chunk_size_aggregation < 1
        ):
            raise ValueError("chunk sizes must be >= 1")
        agg = self.aggregation_tolerance
        if agg is not None and not 0 <= agg <= 1:
            raise ValueError("aggregation_tolerance must lie in [0, 1]")

    def replace(self, **changes) -> LeidenParams:
        return replace(self, **changes)

    def aggregation_chunk(self, dynamic: bool) -> int:
        if self.chunk_size_aggregation is not None:
            return self.chunk_size_aggregation
        return DYNAMIC_AGGREGATION_CHUNK if dynamic else STATIC_AGGREGATION_CHUNK


@dataclass
class CommunityState:
    """Mutable per-level state of the engine.

    ``community_weight`` and ``changed`` are indexed by community id, which
    is always a vertex id of the current graph.
    """

    membership: np.ndarray
    vertex_weight: np.ndarray
    community_weight: np.ndarray
    changed: np.ndarray
    processed: np.ndarray

    @classmethod
    def from_membership(cls, g: Graph, membership=None, changed=None) -> CommunityState:
        n = g.vertex_count
        c = np.arange(n, dtype=np.int64) if membership is None else _as_membership(membership, n)
        k = g.vertex_weights()
        sigma = np.bincount(c, weights=k, minlength=n)
        ch = np.ones(n, np.uint8) if changed is None else np.asarray(changed, np.uint8).copy()
        return cls(c, k, sigma, ch, np.zeros(n, np.uint8))

    def recomputed_sigma(self) -> np.ndarray:
        return np.bincount(
            self.membership, weights=self.vertex_weight, minlength=len(self.membership)
        )

    def check_consistency(self, rtol: float = 1e-6) -> None:
        expect = self.recomputed_sigma()
        live = np.unique(self.membership)
        got = self.community_weight[live]
        tol = rtol * max(1.0, float(np.max(np.abs(expect), initial=0.0)))
        if not np.allclose(got, expect[live], rtol=0, atol=tol):
            bad = live[~np.isclose(got, expect[live], rtol=0, atol=tol)]
            raise AssertionError(f"community weights out of sync for {bad[:10]}")


@dataclass
class AffectedHooks:
    """Which vertices the first pass reprocesses.

    ``affected`` vertices start unprocessed; vertices outside ``in_range``
    are never moved in the first pass.  ``on_change`` widens the affected
    set to the neighbours of a vertex that changed community; inside the
    engine this happens through vertex pruning, which re-marks those
    neighbours unprocessed.
    """

    affected: np.ndarray
    in_range: np.ndarray | None = None
    graph: Graph | None = None
    expands: bool = False

    @classmethod
    def all(cls, n: int) -> AffectedHooks:
        return cls(np.ones(n, np.uint8))

    @classmethod
    def none(cls, n: int) -> AffectedHooks:
        return cls(np.zeros(n, np.uint8))

    def is_affected(self, i: int) -> bool:
        return bool(self.affected[i])

    def in_affected_range(self, i: int) -> bool:
        return True if self.in_range is None else bool(self.in_range[i])

    def on_change(self, i: int) -> None:
        if self.expands and self.graph is not None:
            nbrs, _ = self.graph.edges(i)
            self.affected[nbrs] = 1

    def in_range_array(self, n: int) -> np.ndarray:
        if self.in_range is None:
            return np.ones(n, np.uint8)
        return np.asarray(self.in_range, np.uint8)

    @property
    def affected_fraction(self) -> float:
        return float(np.mean(self.affected)) if len(self.affected) else 0.0


@dataclass
class Dendrogram:
    """Per-pass maps from level-k vertices to level-(k+1) communities."""

    levels: list[np.ndarray] = field(default_factory=list)

    def push(self, level) -> None:
        self.levels.append(np.asarray(level, np.int64))

    def flatten(self, n: int | None = None) -> np.ndarray:
        if not self.levels:
            return np.arange(n or 0, dtype=np.int64)
        flat = self.levels[0]
        for level in self.levels[1:]:
            flat = dendrogram_lookup(flat, level)
        return flat


def _as_membership(c, n: int) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64)
    if c.shape != (n,):
        raise ValueError(f"membership must have length {n}")
    if n and (c.min() < 0 or c.max() >= n):
        raise ValueError("community ids must be vertex ids of the graph")
    return c.copy()


def dendrogram_lookup(flat, level) -> np.ndarray:
    """Compose ``flat`` (vertex -> community) with ``level`` (community -> parent)."""
    flat = np.asarray(flat, dtype=np.int64)
    level = np.asarray(level, dtype=np.int64)
    if len(flat) and (flat.min() < 0 or flat.max() >= len(level)):
        raise KeyError("membership references an id the level does not map")
    out = level[flat]
    if np.any(out < 0):
        raise KeyError("membership references an unmapped id")
    return out


# -- workspace -------------------------------------------------------------------


class _Workspace:
    """Preallocated per-thread hashtables sized for the input graph."""

    def __init__(self, threads: int, n: int):
        self.threads = threads
        self.ht_vals, self.ht_keys = K.ht_alloc(threads, n)

    @classmethod
    def for_graph(cls, g: Graph, threads: int | None) -> _Workspace:
        return cls(resolve_threads(threads), g.vertex_count)


def _ws(g: Graph, workspace: _Workspace | None, threads: int | None) -> _Workspace:
    if workspace is not None and workspace.ht_vals.shape[1] >= g.vertex_count:
        return workspace
    return _Workspace.for_graph(g, threads)


# -- phase operations --------------------------------------------------------------


def scan_communities(acc, g: Graph, c, i: int, include_self: bool) -> dict[int, float]:
    """Add the weight from ``i`` to each neighbouring community into ``acc``."""
    keys, vals = K.scan_into(
        int(i), g.offsets, g.neighbors, g.weights, np.asarray(c, np.int64),
        np.zeros(1, np.int64), False, bool(include_self),
    )
    return _merge(acc, keys, vals)


def scan_bounded(acc, g: Graph, bounds, c, i: int, include_self: bool) -> dict[int, float]:
    """As :func:`scan_communities`, ignoring neighbours outside ``i``'s bound."""
    keys, vals = K.scan_into(
        int(i), g.offsets, g.neighbors, g.weights, np.asarray(c, np.int64),
        np.asarray(bounds, np.int64), True, bool(include_self),
    )
    return _merge(acc, keys, vals)


def _merge(acc, keys, vals) -> dict[int, float]:
    out = {} if acc is None else acc
    for k, v in zip(keys.tolist(), vals.tolist()):
        out[k] = out.get(k, 0.0) + v
    return out


def _move(g, state, in_range, tau, max_iterations, m, ws, chunk):
    """Local-moving iterations; returns (iterations, moves, delta_q)."""
    kern = K.move_iteration_seq if ws.threads == 1 else K.move_iteration_par
    moves = 0
    total_dq = 0.0
    iterations = 0
    with parallel_scope(ws.threads, chunk):
        for _ in range(max_iterations):
            dq, mv = kern(
                g.offsets, g.neighbors, g.weights, state.membership,
                state.vertex_weight, state.community_weight, state.changed,
                state.processed, in_range, m, ws.ht_vals, ws.ht_keys,
            )
            iterations += 1
            moves += mv
            total_dq += dq
            if dq <= tau:
                break
    return iterations, moves, total_dq


def leiden_move(
    g: Graph,
    state: CommunityState,
    hooks: AffectedHooks | None,
    tau: float,
    max_iterations: int,
    *,
    threads: int | None = 1,
    chunk: int = 2048,
) -> int:
    """Run the local-moving phase in place; returns the iterations performed.

    Only vertices not yet ``processed`` are visited; visiting marks them
    processed and a move re-marks the mover's neighbours.  The source and
    target communities of each move are flagged in ``state.changed``.
    """
    n = g.vertex_count
    in_range = (hooks or AffectedHooks.all(n)).in_range_array(n)
    m = total_edge_weight(g)
    if m == 0:
        return 1
    it, _, _ = _move(g, state, in_range, tau, max_iterations, m, _ws(g, None, threads), chunk)
    return it


def leiden_subset_renumber(g: Graph, state: CommunityState, *, threads: int | None = 1) -> None:
    """Relabel every community by one of its member vertices, in place.

    Community weights and changed flags move with their community.  With one
    thread the representative is the smallest member id; with more threads
    it is whichever member wins the compare-and-swap.
    """
    if resolve_threads(threads) == 1:
        K.subset_renumber_seq(state.membership, state.community_weight, state.changed)
    else:
        with parallel_scope(resolve_threads(threads), 2048):
            K.subset_renumber_par(state.membership, state.community_weight, state.changed)


def changed_communities(g: Graph, c_prev, b: BatchUpdate | None, dynamic: bool) -> np.ndarray:
    """Communities to refine in the first pass, flagged by community id.

    Dynamic runs flag the community of every batch edge (deletion or
    insertion) whose endpoints share a community; static runs flag all.
    """
    n = g.vertex_count
    if not dynamic:
        return np.ones(n, np.uint8)
    c = np.asarray(c_prev, np.int64)
    flags = np.zeros(n, np.uint8)
    if b is None:
        return flags
    pairs = np.concatenate([b.deletions, b.insertions])
    if len(pairs):
        ci, cj = c[pairs[:, 0]], c[pairs[:, 1]]
        flags[ci[ci == cj]] = 1
    return flags


def break_changed_communities(g: Graph, state: CommunityState) -> None:
    """Split every flagged community into singletons, in place."""
    K.break_changed(
        state.membership, state.vertex_weight, state.community_weight, state.changed
    )


def leiden_refine(
    g: Graph,
    bounds,
    state: CommunityState,
    tau: float,
    *,
    threads: int | None = 1,
    chunk: int = 2048,
    _ws_cache: _Workspace | None = None,
) -> int:
    """Refinement sweep; returns the number of vertices merged.

    Only a vertex still alone in a flagged community may move, and only into
    a community within its bound whose representative has not itself moved.
    The move is committed by a compare-and-swap of the vertex's community
    weight from ``K[i]`` to 0, so two isolated neighbours cannot both leave.
    ``tau`` is accepted for symmetry with the local-moving phase; the sweep
    is a single pass.
    """
    m = total_edge_weight(g)
    if m == 0:
        return 0
    ws = _ws(g, _ws_cache, threads)
    bounds = np.asarray(bounds, np.int64)
    kern = K.refine_seq if ws.threads == 1 else K.refine_par
    with parallel_scope(ws.threads, chunk):
        return int(
            kern(
                g.offsets, g.neighbors, g.weights, bounds, state.membership,
                state.vertex_weight, state.community_weight, state.changed, m,
                ws.ht_vals, ws.ht_keys,
            )
        )


def leiden_aggregate(
    g: Graph,
    c,
    *,
    threads: int | None = 1,
    chunk: int = 2048,
    _ws_cache: _Workspace | None = None,
) -> Graph:
    """Collapse each community of a dense labelling ``c`` into a super-vertex.

    Edge weights between communities are summed; the weight inside a
    community (both directions of each edge) becomes its self-loop.
    """
    c = np.asarray(c, np.int64)
    ncom = int(c.max()) + 1 if len(c) else 0
    ws = _ws(g, _ws_cache, threads)
    kern = K.aggregate_seq if ws.threads == 1 else K.aggregate_par
    with parallel_scope(ws.threads, chunk):
        offs, nbrs, wts = kern(g.offsets, g.neighbors, g.weights, c, ncom, ws.ht_vals, ws.ht_keys)
    return Graph(offsets=offs, neighbors=nbrs, weights=wts)


# -- engine --------------------------------------------------------------------------


def leiden(
    g: Graph,
    c_prev,
    k,
    sigma,
    hooks: AffectedHooks | None = None,
    changed0=None,
    params: LeidenParams | None = None,
    *,
    dynamic: bool = True,
) -> tuple[np.ndarray, RunReport]:
    """Detect communities on ``g`` starting from ``c_prev``.

    Parameters
    ----------
    g : Graph
        Current snapshot.
    c_prev : array of int
        Starting membership; ids must be vertex ids of ``g``.
    k, sigma : array of float
        Weighted degrees of ``g`` and community weights keyed by ``c_prev``.
    hooks : AffectedHooks, optional
        Vertices to reprocess in the first pass (default: all).
    changed0 : array of uint8, optional
        Communities to refine in the first pass (default: all).
    params : LeidenParams, optional
    dynamic : bool
        Only selects the aggregation chunk size default.

    Returns
    -------
    membership : ndarray of int64
        Dense labels ``0..k-1`` of the top-level communities.
    report : RunReport
        Phase timings and per-pass statistics (``modularity`` is left for the
        caller to compute).
    """
    params = params or LeidenParams()
    n = g.vertex_count
    threads = resolve_threads(params.threads)
    hooks = hooks or AffectedHooks.all(n)
    report = RunReport(threads=threads, seed=params.seed)
    if n == 0:
        return np.zeros(0, np.int64), report

    ws = _Workspace(threads, n)
    state = CommunityState(
        membership=_as_membership(c_prev, n),
        vertex_weight=np.asarray(k, np.float64).copy(),
        community_weight=np.asarray(sigma, np.float64).copy(),
        changed=(np.ones(n, np.uint8) if changed0 is None else np.asarray(changed0, np.uint8).copy()),
        processed=(1 - np.asarray(hooks.affected, np.uint8)).astype(np.uint8),
    )
    in_range = hooks.in_range_array(n)
    top = np.arange(n, dtype=np.int64)
    agg_chunk = params.aggregation_chunk(dynamic)
    timer = PhaseTimer()
    t_start = time.perf_counter()

    m = total_edge_weight(g)
    if m == 0:
        report.community_count = n
        report.time_total = time.perf_counter() - t_start
        return top, report

    gp = g
    tau = params.tolerance
    prior_live = np.unique(state.membership)
    for lp in range(params.max_passes):
        report.passes = lp + 1
        with timer.phase("move"):
            li, moves, _ = _move(gp, state, in_range, tau, params.max_iterations, m, ws, params.chunk_size_main)
        report.iterations.append(li)
        if lp == 0:
            report.moves_first_pass = moves
        if params.debug:
            state.check_consistency()
        with timer.phase("refine"):
            leiden_subset_renumber(gp, state, threads=threads)
            if lp == 0:
                live = np.unique(state.membership)
                report.changed_community_fraction = float(
                    np.count_nonzero(state.changed[live]) / max(len(prior_live), len(live), 1)
                )
            bounds = state.membership.copy()
            break_changed_communities(gp, state)
            leiden_refine(gp, bounds, state, tau, threads=threads, chunk=params.chunk_size_main, _ws_cache=ws)
        if params.debug:
            state.check_consistency()
            _assert_within_bounds(bounds, state.membership)
        if lp > 0 and li <= 1:
            break
        with timer.phase("aggregate"):
            dense, ncom = K.renumber_dense(state.membership)
            agg = params.aggregation_tolerance
            if agg is not None and agg < 1 and ncom > agg * gp.vertex_count:
                state.membership = dense
                break
            top = dense[top]
            gp = leiden_aggregate(gp, dense, threads=threads, chunk=agg_chunk, _ws_cache=ws)
            kp = gp.vertex_weights()
            state = CommunityState(
                membership=np.arange(ncom, dtype=np.int64),
                vertex_weight=kp,
                community_weight=kp.copy(),
                changed=np.ones(ncom, np.uint8),
                processed=np.zeros(ncom, np.uint8),
            )
            in_range = np.ones(ncom, np.uint8)
            tau /= params.tolerance_drop
    else:
        report.max_passes_hit = True

    top = dendrogram_lookup(top, state.membership)
    membership, count = K.renumber_dense(top)
    report.community_count = int(count)
    report.time_move = timer["move"]
    report.time_refine = timer["refine"]
    report.time_aggregate = timer["aggregate"]
    report.time_total = time.perf_counter() - t_start
    return membership, report


def _assert_within_bounds(bounds, membership) -> None:
    # every refined community must sit inside a single bound
    pairs = np.unique(np.column_stack([membership, bounds]), axis=0)
    if len(np.unique(pairs[:, 0])) != len(pairs):
        raise AssertionError("refinement crossed a community bound")


def static_leiden(g: Graph, params: LeidenParams | None = None) -> tuple[np.ndarray, RunReport]:
    """Leiden from singleton communities with every vertex and community in play."""
    n = g.vertex_count
    state = CommunityState.from_membership(g)
    return leiden(
        g,
        state.membership,
        state.vertex_weight,
        state.community_weight,
        AffectedHooks.all(n),
        np.ones(n, np.uint8),
        params,
        dynamic=False,
    )
