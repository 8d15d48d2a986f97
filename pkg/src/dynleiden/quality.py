"""Partition quality: modularity, delta-modularity, connectivity audit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._kernels import delta_modularity as _delta_modularity_kernel
from .graph import Graph, total_edge_weight

__all__ = [
    "PartitionStats",
    "audit_connectivity",
    "delta_modularity",
    "modularity",
    "partition_stats",
]


def modularity(g: Graph, membership) -> float:
    """Newman modularity of ``membership`` on ``g``.

    Intra-community weight counts both stored directions of every edge
    (self-loops once), normalised by ``2m``.  Returns 0 for an edgeless graph.
    """
    c = np.asarray(membership, dtype=np.int64)
    m = total_edge_weight(g)
    if m == 0:
        return 0.0
    src, dst, w = g.to_edges()
    w = w.astype(np.float64)
    intra = float(np.sum(w[c[src] == c[dst]]))
    _, dense = np.unique(c, return_inverse=True)
    sigma = np.bincount(dense, weights=g.vertex_weights())
    return intra / (2.0 * m) - float(np.sum((sigma / (2.0 * m)) ** 2))


def delta_modularity(k_i_to_c, k_i_to_d, k_i, sigma_c, sigma_d, m) -> float:
    """Change in modularity from moving vertex ``i`` from ``d`` to ``c``.

    ``sigma_d`` must include ``k_i`` (the vertex is still in ``d``) and
    ``sigma_c`` must exclude it.
    """
    return float(
        _delta_modularity_kernel(
            float(k_i_to_c), float(k_i_to_d), float(k_i),
            float(sigma_c), float(sigma_d), float(m),
        )
    )


def audit_connectivity(g: Graph, membership) -> list[int]:
    """Ids of communities whose members are not connected by intra-community edges."""
    c = np.asarray(membership, dtype=np.int64)
    n = g.vertex_count
    if n == 0:
        return []
    src, dst, _ = g.to_edges()
    keep = c[src] == c[dst]
    adj = csr_matrix(
        (np.ones(int(keep.sum())), (src[keep], dst[keep])), shape=(n, n)
    )
    _, comp = connected_components(adj, directed=False)
    # a community is connected iff all its members share one component label
    pairs = np.unique(np.column_stack([c, comp]), axis=0)
    ids, counts = np.unique(pairs[:, 0], return_counts=True)
    return [int(x) for x in ids[counts > 1]]


@dataclass(frozen=True)
class PartitionStats:
    community_count: int
    sizes: np.ndarray
    modularity: float
    disconnected_count: int

    @property
    def size_histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.sizes, return_counts=True)
        return {int(v): int(k) for v, k in zip(vals, counts)}


def partition_stats(g: Graph, membership) -> PartitionStats:
    c = np.asarray(membership, dtype=np.int64)
    _, sizes = np.unique(c, return_counts=True)
    return PartitionStats(
        community_count=len(sizes),
        sizes=np.sort(sizes)[::-1],
        modularity=modularity(g, c),
        disconnected_count=len(audit_connectivity(g, c)),
    )
