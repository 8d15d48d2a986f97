"""Small synthetic graphs for tests, examples and the scaling smoke run."""

from __future__ import annotations

import numpy as np

from .graph import Graph, build_graph

__all__ = ["barbell", "erdos_renyi", "planted_partition", "two_cliques"]


def barbell() -> Graph:
    """Two triangles joined by the bridge 2-3."""
    edges = [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1), (2, 3, 1)]
    return build_graph(edges, 6)


def two_cliques(size: int = 4, bridge: bool = True) -> Graph:
    """Two ``size``-cliques, optionally joined by one edge."""
    edges = []
    for base in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                edges.append((base + i, base + j, 1.0))
    if bridge:
        edges.append((size - 1, size, 1.0))
    return build_graph(edges, 2 * size)


def _sample_pairs(rng, n: int, count: int, lo: int = 0) -> np.ndarray:
    u = rng.integers(lo, lo + n, size=count)
    v = rng.integers(lo, lo + n, size=count)
    keep = u != v
    return np.column_stack([u[keep], v[keep]])


def erdos_renyi(n: int, avg_degree: float, seed: int = 0) -> Graph:
    """G(n, M) style random graph with about ``n * avg_degree / 2`` edges."""
    rng = np.random.default_rng(seed)
    pairs = _sample_pairs(rng, n, int(n * avg_degree / 2))
    return build_graph(np.column_stack([pairs, np.ones(len(pairs))]), n)


def planted_partition(
    n: int,
    communities: int,
    avg_degree: float = 10.0,
    mixing: float = 0.1,
    seed: int = 0,
) -> tuple[Graph, np.ndarray]:
    """Random graph with ``communities`` equal-size planted groups.

    A fraction ``mixing`` of the roughly ``n * avg_degree / 2`` edges join
    different groups; the rest fall inside one.  Returns the graph and the
    planted labels.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % communities
    rng.shuffle(labels)
    total = int(n * avg_degree / 2)
    n_inter = int(round(mixing * total))
    n_intra = total - n_inter

    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(communities + 1))
    sizes = np.diff(bounds)
    group = rng.choice(communities, size=n_intra, p=sizes / sizes.sum())
    a = bounds[group] + (rng.random(n_intra) * sizes[group]).astype(np.int64)
    b = bounds[group] + (rng.random(n_intra) * sizes[group]).astype(np.int64)
    intra = np.column_stack([order[a], order[b]])

    inter = _sample_pairs(rng, n, n_inter)
    pairs = np.concatenate([intra, inter])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    g = build_graph(np.column_stack([pairs, np.ones(len(pairs))]), n)
    return g, labels
