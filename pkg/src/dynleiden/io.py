"""Graph loaders: Matrix Market and timestamped edge lists."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io

from .graph import Graph, GraphError, build_graph

__all__ = ["TemporalEdges", "load_edge_list", "load_graph", "load_matrix_market", "load_temporal"]


def load_matrix_market(path) -> Graph:
    """Load a ``%%MatrixMarket matrix coordinate`` file as an undirected graph.

    Pattern matrices get unit weights; general matrices are symmetrised.
    Zero entries and self-loops are dropped; repeated pairs keep the last
    weight read.  Non-positive weights are rejected.
    """
    path = Path(path)
    try:
        mat = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise GraphError(f"cannot read Matrix Market file {path}: {exc}") from exc
    if not hasattr(mat, "tocoo"):
        raise GraphError(f"{path} is not a coordinate (sparse) matrix")
    coo = mat.tocoo()
    n = max(coo.shape)
    keep = (coo.row != coo.col) & (coo.data != 0)
    w = np.asarray(coo.data[keep], dtype=np.float64)
    if np.any(w < 0):
        raise GraphError(f"{path} has negative edge weights")
    edges = np.column_stack([coo.row[keep], coo.col[keep], w])
    return build_graph(edges, n)


@dataclass(frozen=True)
class TemporalEdges:
    """Edges of a temporal stream sorted by timestamp (stable)."""

    sources: np.ndarray
    targets: np.ndarray
    times: np.ndarray
    vertex_count: int

    def __len__(self) -> int:
        return len(self.sources)


def load_temporal(path) -> TemporalEdges:
    """Parse whitespace-separated ``u v t`` lines; ``#`` starts a comment line.

    Self-loops are dropped.  The vertex universe is ``0..max id``; ties in
    ``t`` keep file order.
    """
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#") or s.startswith("%"):
                continue
            parts = s.split()
            if len(parts) < 3:
                raise GraphError(f"{path}:{lineno}: expected 'u v t'")
            try:
                rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError:
                raise GraphError(f"{path}:{lineno}: malformed record {s!r}") from None
    if not rows:
        return TemporalEdges(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0), 0)
    arr = np.array(rows, dtype=np.float64)
    u, v, t = arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2]
    if u.min() < 0 or v.min() < 0:
        raise GraphError(f"{path}: negative vertex id")
    n = int(max(u.max(), v.max())) + 1
    keep = u != v
    u, v, t = u[keep], v[keep], t[keep]
    order = np.argsort(t, kind="stable")
    return TemporalEdges(u[order], v[order], t[order], n)


def load_edge_list(path) -> Graph:
    """Plain ``u v [w]`` lines (0-based ids, ``#`` comments), symmetrised."""
    path = Path(path)
    try:
        arr = np.loadtxt(path, comments=("#", "%"), ndmin=2)
    except (OSError, ValueError) as exc:
        raise GraphError(f"cannot read edge list {path}: {exc}") from exc
    if arr.size == 0:
        return build_graph(np.zeros((0, 3)), 0)
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.ones(len(arr))])
    n = int(arr[:, :2].max()) + 1
    arr = arr[arr[:, 0] != arr[:, 1]]
    return build_graph(arr[:, :3], n)


def load_graph(path) -> Graph:
    """Dispatch on suffix: ``.mtx`` is Matrix Market, anything else an edge list."""
    path = Path(path)
    if not path.is_file():
        raise GraphError(f"no such graph file: {path}")
    if path.suffix.lower() == ".mtx":
        return load_matrix_market(path)
    return load_edge_list(path)
