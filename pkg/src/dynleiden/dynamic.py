"""Naive-dynamic, Delta-screening and Dynamic Frontier front-ends.

All three share the engine in :mod:`dynleiden.leiden`; they differ only in
which vertices the first pass reprocesses.  Each takes the next snapshot,
the batch that produced it, and the state left by the previous run, and
returns the new membership with its vertex and community weights.

Batches are expected in effective form (see
:func:`dynleiden.graph.normalize_batch`): symmetric, valid against the
previous snapshot, and carrying the true weights of deleted edges.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._parallel import parallel_scope, resolve_threads
from .graph import BatchUpdate, Graph, total_edge_weight
from .leiden import AffectedHooks, LeidenParams, changed_communities, leiden
from .report import RunReport

__all__ = [
    "AffectedMarks",
    "DynamicContext",
    "delta_screening",
    "dynamic_frontier",
    "mark_delta_screening",
    "mark_dynamic_frontier",
    "naive_dynamic",
    "update_weights",
]


@dataclass
class DynamicContext:
    """State carried from snapshot ``t-1``: membership, K and Σ."""

    c_prev: np.ndarray
    k_prev: np.ndarray
    sigma_prev: np.ndarray

    @classmethod
    def from_membership(cls, g: Graph, membership) -> DynamicContext:
        c = np.asarray(membership, np.int64).copy()
        k = g.vertex_weights()
        return cls(c, k, np.bincount(c, weights=k, minlength=g.vertex_count))

    def check_consistency(self, g: Graph | None = None, rtol: float = 1e-6) -> None:
        k = self.k_prev if g is None else g.vertex_weights()
        if g is not None and not np.allclose(self.k_prev, k, rtol=rtol, atol=rtol):
            raise AssertionError("vertex weights do not match the graph")
        expect = np.bincount(self.c_prev, weights=k, minlength=len(self.sigma_prev))
        live = np.unique(self.c_prev)
        if not np.allclose(self.sigma_prev[live], expect[live], rtol=rtol, atol=rtol):
            raise AssertionError("community weights do not match the membership")


@dataclass
class AffectedMarks:
    """Initial marks of a dynamic front-end.

    ``vertices`` is δV; ``neighbors`` (δE) and ``communities`` (δC) are only
    filled by Delta-screening.  ``affected`` is the expanded vertex set the
    first pass reprocesses.
    """

    vertices: np.ndarray
    neighbors: np.ndarray
    communities: np.ndarray
    affected: np.ndarray

    @property
    def affected_fraction(self) -> float:
        return float(np.mean(self.affected)) if len(self.affected) else 0.0


def update_weights(
    g_t: Graph, b: BatchUpdate, ctx: DynamicContext, threads: int | None = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Roll K and Σ forward across ``b``; communities stay keyed by ``c_prev``.

    Each thread owns a contiguous range of vertex (and community) ids and
    applies only the updates landing in that range, so no atomics are
    needed.
    """
    n = g_t.vertex_count
    k = np.asarray(ctx.k_prev, np.float64).copy()
    s = np.asarray(ctx.sigma_prev, np.float64).copy()
    if b.is_empty:
        return k, s
    t = resolve_threads(threads)
    with parallel_scope(t, 1):
        K.update_weights_owned(
            n, t,
            b.deletions, b.deletion_weights.astype(np.float64),
            b.insertions, b.insertion_weights.astype(np.float64),
            np.asarray(ctx.c_prev, np.int64), k, s,
        )
    return k, s


def _neighbors_of(g: Graph, flags: np.ndarray) -> np.ndarray:
    out = np.zeros(g.vertex_count, np.uint8)
    out[g.neighbors[flags[g.sources()].astype(bool)]] = 1
    return out


def mark_dynamic_frontier(g_t: Graph, b: BatchUpdate, c_prev) -> AffectedMarks:
    """Sources of intra-community deletions and cross-community insertions.

    Batches are symmetric, so both endpoints end up marked.
    """
    n = g_t.vertex_count
    c = np.asarray(c_prev, np.int64)
    dv = np.zeros(n, np.uint8)
    d, a = b.deletions, b.insertions
    dv[d[c[d[:, 0]] == c[d[:, 1]], 0]] = 1
    dv[a[c[a[:, 0]] != c[a[:, 1]], 0]] = 1
    zeros = np.zeros(n, np.uint8)
    return AffectedMarks(dv, zeros, zeros.copy(), dv.copy())


def mark_delta_screening(
    g_t: Graph, b: BatchUpdate, c_prev, k_prev, sigma_prev
) -> AffectedMarks:
    """Delta-screening marks for a batch (sorted by source internally).

    An intra-community deletion ``(i, j)`` marks ``i``, its neighbours and
    ``C[j]``.  For each insertion source ``i`` the cross-community insertion
    weight is summed per target community; the community ``c*`` with the
    highest delta-modularity (lowest id on ties) is marked together with
    ``i`` and its neighbours.  Finally neighbour and community marks are
    expanded into vertex marks.
    """
    n = g_t.vertex_count
    c = np.asarray(c_prev, np.int64)
    k = np.asarray(k_prev, np.float64)
    sigma = np.asarray(sigma_prev, np.float64)
    b = b.sorted_by_source()
    dv = np.zeros(n, np.uint8)
    de = np.zeros(n, np.uint8)
    dc = np.zeros(n, np.uint8)

    d = b.deletions
    intra = d[c[d[:, 0]] == c[d[:, 1]]]
    dv[intra[:, 0]] = 1
    de[intra[:, 0]] = 1
    dc[c[intra[:, 1]]] = 1

    a = b.insertions
    cross = c[a[:, 0]] != c[a[:, 1]]
    m = total_edge_weight(g_t)
    if np.any(cross) and m > 0:
        src = a[cross, 0]
        tgt = c[a[cross, 1]]
        keys, inv = np.unique(src * n + tgt, return_inverse=True)
        h = np.bincount(inv, weights=b.insertion_weights[cross])
        ks, kc = keys // n, keys % n
        # K_i->d is taken as 0: only the new cross-community links are screened
        dq = (h / m) - k[ks] * (k[ks] + sigma[kc] - sigma[c[ks]]) / (2.0 * m * m)
        order = np.lexsort((kc, -dq, ks))
        first = np.ones(len(order), bool)
        first[1:] = ks[order][1:] != ks[order][:-1]
        best = order[first]
        dv[ks[best]] = 1
        de[ks[best]] = 1
        dc[kc[best]] = 1

    affected = dv | _neighbors_of(g_t, de) | dc[c]
    return AffectedMarks(dv, de, dc, affected.astype(np.uint8))


def _marked_community_fraction(c_prev, affected) -> float:
    live = np.unique(c_prev)
    if not len(live):
        return 0.0
    hit = np.unique(np.asarray(c_prev)[affected.astype(bool)])
    return len(hit) / len(live)


def _run(name, g_t, b, ctx, params, mark):
    params = params or LeidenParams()
    n = g_t.vertex_count
    t0 = time.perf_counter()
    k_t, sigma_t = update_weights(g_t, b, ctx, params.threads)
    hooks, affected = mark(k_t, sigma_t)
    changed0 = changed_communities(g_t, ctx.c_prev, b, dynamic=True)
    t_mark = time.perf_counter() - t0

    membership, report = leiden(
        g_t, ctx.c_prev, k_t, sigma_t, hooks, changed0, params, dynamic=True
    )
    report.algorithm = name
    report.time_marking = t_mark
    report.time_total += t_mark
    report.affected_fraction = float(np.mean(affected)) if n else 0.0
    report.marked_community_fraction = _marked_community_fraction(ctx.c_prev, affected)
    sigma_out = np.bincount(membership, weights=k_t, minlength=n)
    return membership, k_t, sigma_out, report


def naive_dynamic(
    g_t: Graph, b: BatchUpdate, ctx: DynamicContext, params: LeidenParams | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, RunReport]:
    """Reprocess every vertex, starting from the previous membership."""
    n = g_t.vertex_count

    def mark(k_t, sigma_t):
        hooks = AffectedHooks.all(n)
        return hooks, hooks.affected

    return _run("nd", g_t, b, ctx, params, mark)


def delta_screening(
    g_t: Graph, b: BatchUpdate, ctx: DynamicContext, params: LeidenParams | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, RunReport]:
    """Reprocess only the region screened by :func:`mark_delta_screening`.

    Unmarked vertices stay put in the first pass even when a neighbour moves.
    """

    def mark(k_t, sigma_t):
        # screening uses the weights from before the batch
        marks = mark_delta_screening(g_t, b, ctx.c_prev, ctx.k_prev, ctx.sigma_prev)
        hooks = AffectedHooks(marks.affected.copy(), in_range=marks.affected.copy())
        return hooks, marks.affected

    return _run("ds", g_t, b, ctx, params, mark)


def dynamic_frontier(
    g_t: Graph, b: BatchUpdate, ctx: DynamicContext, params: LeidenParams | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, RunReport]:
    """Start from the batch endpoints and let the frontier grow as vertices move.

    Growth needs no extra bookkeeping: a vertex that changes community marks
    its neighbours unprocessed, which is exactly the frontier expansion.
    """

    def mark(k_t, sigma_t):
        marks = mark_dynamic_frontier(g_t, b, ctx.c_prev)
        hooks = AffectedHooks(marks.affected.copy(), graph=g_t, expands=True)
        return hooks, marks.affected

    return _run("df", g_t, b, ctx, params, mark)
