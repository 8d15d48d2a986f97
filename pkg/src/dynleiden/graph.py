"""Immutable CSR graphs and symmetric batch updates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

VERTEX_DTYPE = np.int32
OFFSET_DTYPE = np.int64
WEIGHT_DTYPE = np.float32

__all__ = [
    "BatchUpdate",
    "Graph",
    "GraphError",
    "apply_batch",
    "build_graph",
    "normalize_batch",
    "total_edge_weight",
    "validate_graph",
]


class GraphError(ValueError):
    """Raised for malformed graph input (bad ids, non-positive weights)."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph in CSR form.

    Every undirected edge ``{i, j}`` is stored twice, as ``(i, j, w)`` and
    ``(j, i, w)``.  A self-loop is stored once and contributes its full
    stored weight to the weighted degree of its vertex.
    """

    offsets: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray

    @property
    def vertex_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def directed_edge_count(self) -> int:
        return int(self.offsets[-1])

    @property
    def edge_count(self) -> int:
        """Number of undirected edges, self-loops included."""
        loops = int(np.count_nonzero(self.sources() == self.neighbors))
        return (self.directed_edge_count + loops) // 2

    def degree(self, i: int) -> int:
        return int(self.offsets[i + 1] - self.offsets[i])

    def edges(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return self.neighbors[lo:hi], self.weights[lo:hi]

    def sources(self) -> np.ndarray:
        """Source vertex of every stored directed edge."""
        return np.repeat(
            np.arange(self.vertex_count, dtype=np.int64), np.diff(self.offsets)
        )

    def vertex_weights(self) -> np.ndarray:
        """Weighted degree ``K`` of every vertex, in float64."""
        return np.bincount(
            self.sources(),
            weights=self.weights.astype(np.float64),
            minlength=self.vertex_count,
        )

    def to_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.sources(), self.neighbors.astype(np.int64), self.weights

    def has_edge(self, i: int, j: int) -> bool:
        nbrs, _ = self.edges(i)
        return bool(np.any(nbrs == j))

    def edge_weight(self, i: int, j: int) -> float:
        nbrs, wts = self.edges(i)
        hit = np.flatnonzero(nbrs == j)
        if len(hit) == 0:
            raise KeyError((i, j))
        return float(wts[hit[0]])

    def to_scipy(self):
        from scipy.sparse import csr_matrix

        n = self.vertex_count
        return csr_matrix(
            (self.weights, self.neighbors, self.offsets), shape=(n, n)
        )

    def __repr__(self) -> str:
        return (
            f"Graph(vertex_count={self.vertex_count}, "
            f"edge_count={self.edge_count}, dtype={self.weights.dtype})"
        )


def _canonical_keys(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    lo = np.minimum(u, v).astype(np.int64)
    hi = np.maximum(u, v).astype(np.int64)
    return lo * n + hi


def _last_unique(keys: np.ndarray, values: np.ndarray):
    """Unique keys (sorted), each paired with the value of its last occurrence."""
    if len(keys) == 0:
        return keys, values
    rev_keys = keys[::-1]
    uniq, first_in_rev = np.unique(rev_keys, return_index=True)
    return uniq, values[::-1][first_in_rev]


def _from_canonical(keys: np.ndarray, w: np.ndarray, n: int, dtype) -> Graph:
    lo = keys // n
    hi = keys % n
    off_diag = lo != hi
    src = np.concatenate([lo, hi[off_diag]])
    dst = np.concatenate([hi, lo[off_diag]])
    ww = np.concatenate([w, w[off_diag]])
    return _from_directed(src, dst, ww, n, dtype)


def _from_directed(src, dst, w, n: int, dtype=WEIGHT_DTYPE) -> Graph:
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n) if len(src) else np.zeros(n, np.int64)
    offsets = np.zeros(n + 1, dtype=OFFSET_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    return Graph(
        offsets=offsets,
        neighbors=np.ascontiguousarray(dst[order], dtype=VERTEX_DTYPE),
        weights=np.ascontiguousarray(w[order], dtype=dtype),
    )


def _edge_array(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 3))
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise GraphError("edges must be (i, j) or (i, j, w) tuples")
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.ones(len(arr))])
    return arr


def build_graph(edges, vertex_count: int, dtype=WEIGHT_DTYPE) -> Graph:
    """Build a symmetric CSR graph from an edge list.

    Parameters
    ----------
    edges : iterable of (i, j) or (i, j, w), or an array of shape (E, 2|3)
        Missing reverse edges are added.  Repeated pairs (in either
        direction) collapse to a single edge carrying the last weight seen.
    vertex_count : int
        Size of the vertex universe; every id must be below it.
    dtype : numpy dtype, default float32
        Storage type of edge weights.

    Raises
    ------
    GraphError
        On an out-of-range vertex id or a non-positive weight.
    """
    n = int(vertex_count)
    if n < 0:
        raise GraphError("vertex_count must be non-negative")
    arr = _edge_array(edges)
    u = arr[:, 0].astype(np.int64)
    v = arr[:, 1].astype(np.int64)
    w = arr[:, 2]
    if len(arr) and (u.min() < 0 or v.min() < 0 or u.max() >= n or v.max() >= n):
        raise GraphError(f"vertex id out of range for vertex_count={n}")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise GraphError("edge weights must be finite and > 0")
    keys, w = _last_unique(_canonical_keys(u, v, n), w)
    return _from_canonical(keys, w, n, dtype)


def validate_graph(g: Graph) -> None:
    """Full adjacency scan of the CSR invariants; raises GraphError."""
    n = g.vertex_count
    if g.offsets[0] != 0 or np.any(np.diff(g.offsets) < 0):
        raise GraphError("offsets must start at 0 and be non-decreasing")
    if g.offsets[-1] != len(g.neighbors) or len(g.neighbors) != len(g.weights):
        raise GraphError("offsets[N] must equal the directed edge count")
    if len(g.neighbors) and (g.neighbors.min() < 0 or g.neighbors.max() >= n):
        raise GraphError("neighbor id out of range")
    if np.any(g.weights <= 0):
        raise GraphError("weights must be > 0")
    src, dst, w = g.to_edges()
    fwd = src * n + dst
    if len(np.unique(fwd)) != len(fwd):
        raise GraphError("duplicate (i, j) pair in adjacency")
    order_f = np.argsort(fwd, kind="stable")
    rev = dst * n + src
    order_r = np.argsort(rev, kind="stable")
    if not np.array_equal(fwd[order_f], rev[order_r]):
        raise GraphError("adjacency is not symmetric")
    if not np.array_equal(w[order_f], w[order_r]):
        raise GraphError("reverse edge weights differ")


def total_edge_weight(g: Graph) -> float:
    """``m``: half the sum of all stored directed weights (float64)."""
    return float(np.sum(g.weights, dtype=np.float64) / 2.0)


@dataclass(frozen=True, eq=False)
class BatchUpdate:
    """Edge deletions and insertions between two snapshots.

    Records are directed; a well-formed batch lists every update in both
    directions.  ``deletion_weights`` carries the weight the deleted edge had
    in the previous snapshot (needed to roll vertex/community weights
    forward); it defaults to 1.
    """

    deletions: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    insertions: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    insertion_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    deletion_weights: np.ndarray | None = None

    def __post_init__(self):
        dels = np.asarray(self.deletions, dtype=np.int64).reshape(-1, 2)
        ins = np.asarray(self.insertions, dtype=np.int64).reshape(-1, 2)
        iw = np.asarray(self.insertion_weights, dtype=np.float64).reshape(-1)
        if len(iw) == 0 and len(ins):
            iw = np.ones(len(ins))
        dw = self.deletion_weights
        dw = np.ones(len(dels)) if dw is None else np.asarray(dw, np.float64).reshape(-1)
        if len(iw) != len(ins) or len(dw) != len(dels):
            raise ValueError("weight arrays must match their edge arrays")
        object.__setattr__(self, "deletions", dels)
        object.__setattr__(self, "insertions", ins)
        object.__setattr__(self, "insertion_weights", iw)
        object.__setattr__(self, "deletion_weights", dw)

    @classmethod
    def empty(cls) -> BatchUpdate:
        return cls()

    @classmethod
    def from_edges(cls, deletions=(), insertions=(), symmetrize: bool = True):
        """Build from ``(i, j[, w])`` tuples, adding reverse records if asked."""
        d = _edge_array(list(deletions))
        a = _edge_array(list(insertions))
        if symmetrize:
            d = _symmetrize_records(d)
            a = _symmetrize_records(a)
        return cls(
            deletions=d[:, :2].astype(np.int64),
            insertions=a[:, :2].astype(np.int64),
            insertion_weights=a[:, 2],
            deletion_weights=d[:, 2],
        )

    def __len__(self) -> int:
        return len(self.deletions) + len(self.insertions)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def inverse(self) -> BatchUpdate:
        """Batch undoing this one: insertions become deletions and vice versa."""
        return BatchUpdate(
            deletions=self.insertions.copy(),
            insertions=self.deletions.copy(),
            insertion_weights=self.deletion_weights.copy(),
            deletion_weights=self.insertion_weights.copy(),
        )

    def is_symmetric(self) -> bool:
        def sym(pairs, w):
            fwd = {(int(i), int(j)): float(x) for (i, j), x in zip(pairs, w)}
            return all(fwd.get((j, i)) == x for (i, j), x in fwd.items())

        return sym(self.deletions, self.deletion_weights) and sym(
            self.insertions, self.insertion_weights
        )

    def sorted_by_source(self) -> BatchUpdate:
        od = np.lexsort((self.deletions[:, 1], self.deletions[:, 0]))
        oi = np.lexsort((self.insertions[:, 1], self.insertions[:, 0]))
        return BatchUpdate(
            deletions=self.deletions[od],
            insertions=self.insertions[oi],
            insertion_weights=self.insertion_weights[oi],
            deletion_weights=self.deletion_weights[od],
        )

    def with_deletion_weights(self, g: Graph) -> BatchUpdate:
        """Copy whose deletion weights are read from ``g`` (missing edges keep 1)."""
        dw = self.deletion_weights.copy()
        for k, (i, j) in enumerate(self.deletions):
            nbrs, wts = g.edges(int(i))
            hit = np.flatnonzero(nbrs == j)
            if len(hit):
                dw[k] = wts[hit[0]]
        return BatchUpdate(
            self.deletions, self.insertions, self.insertion_weights, dw
        )


def _symmetrize_records(arr: np.ndarray) -> np.ndarray:
    if len(arr) == 0:
        return arr
    rev = arr[:, [1, 0, 2]]
    both = np.concatenate([arr, rev])
    n = int(both[:, :2].max()) + 1
    keys = both[:, 0].astype(np.int64) * n + both[:, 1].astype(np.int64)
    _, first = np.unique(keys, return_index=True)
    return both[np.sort(first)]


def _existing_keys(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    src, dst, w = g.to_edges()
    keep = src <= dst
    keys = src[keep] * g.vertex_count + dst[keep]
    order = np.argsort(keys)
    return keys[order], w[keep][order].astype(np.float64)


def _repeated_records(pairs: np.ndarray, n: int) -> int:
    directed = pairs[:, 0] * n + pairs[:, 1]
    return len(directed) - len(np.unique(directed))


def normalize_batch(g: Graph, b: BatchUpdate) -> tuple[BatchUpdate, int]:
    """Reduce ``b`` to the updates that are valid against ``g``.

    Deletions of absent edges and insertions of present (or repeated) pairs
    are dropped.  The result is symmetric, carries the true deletion weights
    from ``g``, and is returned with the number of directed records skipped.
    """
    n = g.vertex_count
    for arr in (b.deletions, b.insertions):
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise GraphError("batch references a vertex outside the graph")
    ekeys, ew = _existing_keys(g)
    skipped = 0

    dkeys = _canonical_keys(b.deletions[:, 0], b.deletions[:, 1], n)
    present = np.isin(dkeys, ekeys)
    skipped += int(np.count_nonzero(~present))
    skipped += _repeated_records(b.deletions[present], n)
    dkeys = np.unique(dkeys[present])
    dw = ew[np.searchsorted(ekeys, dkeys)] if len(dkeys) else np.zeros(0)

    ikeys = _canonical_keys(b.insertions[:, 0], b.insertions[:, 1], n)
    remaining = np.setdiff1d(ekeys, dkeys, assume_unique=True)
    fresh = ~np.isin(ikeys, remaining)
    skipped += int(np.count_nonzero(~fresh))
    skipped += _repeated_records(b.insertions[fresh], n)
    uk, uw = _last_unique(ikeys[fresh], b.insertion_weights[fresh])

    def emit(keys, w):
        lo, hi = keys // max(n, 1), keys % max(n, 1)
        off = lo != hi
        pairs = np.concatenate(
            [np.column_stack([lo, hi]), np.column_stack([hi[off], lo[off]])]
        )
        return pairs.reshape(-1, 2), np.concatenate([w, w[off]])

    dpairs, dws = emit(dkeys, dw)
    ipairs, iws = emit(uk, uw)
    return (
        BatchUpdate(
            deletions=dpairs,
            insertions=ipairs,
            insertion_weights=iws,
            deletion_weights=dws,
        ),
        skipped,
    )


def apply_batch(g: Graph, b: BatchUpdate, *, return_skipped: bool = False):
    """Return the next snapshot: ``g`` minus deletions plus insertions.

    The vertex count never changes.  Invalid records (deleting a missing
    edge, inserting an existing one) are skipped and counted rather than
    raising; pass ``return_skipped=True`` to get ``(graph, skipped)``.
    """
    n = g.vertex_count
    eff, skipped = normalize_batch(g, b)
    if skipped:
        logger.warning("apply_batch skipped %d invalid update records", skipped)
    ekeys, ew = _existing_keys(g)
    dk = _canonical_keys(eff.deletions[:, 0], eff.deletions[:, 1], n)
    keep = ~np.isin(ekeys, dk)
    ik = _canonical_keys(eff.insertions[:, 0], eff.insertions[:, 1], n)
    ik, iw = _last_unique(ik, eff.insertion_weights)
    keys = np.concatenate([ekeys[keep], ik])
    w = np.concatenate([ew[keep], iw])
    out = _from_canonical(keys, w, n, g.weights.dtype)
    return (out, skipped) if return_skipped else out
