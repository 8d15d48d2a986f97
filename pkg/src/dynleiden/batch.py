"""Random batch updates and their text serialisation.

A generated batch mixes insertions of uniformly drawn non-edges (unit
weight) with deletions of uniformly drawn existing edges, and lists every
update in both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import BatchUpdate, Graph

__all__ = ["BatchSpec", "batch_counts", "generate_batch", "read_batch", "write_batch"]

RETRY_FACTOR = 100


@dataclass(frozen=True)
class BatchSpec:
    """Batch size as a fraction of |E|, the insertion share, seed and repetitions."""

    fraction: float
    insertion_share: float = 0.8
    seed: int = 0
    repetitions: int = 5

    def __post_init__(self):
        if not 0 <= self.fraction <= 1:
            raise ValueError("fraction must lie in [0, 1]")
        if not 0 <= self.insertion_share <= 1:
            raise ValueError("insertion_share must lie in [0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


def batch_counts(edge_count: int, spec: BatchSpec) -> tuple[int, int]:
    """Undirected ``(insertions, deletions)`` for a graph with ``edge_count`` edges."""
    total = _round(spec.fraction * edge_count)
    ins = _round(spec.insertion_share * total)
    return ins, total - ins


def _undirected_edges(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src, dst, w = g.to_edges()
    keep = src <= dst
    return src[keep], dst[keep], w[keep].astype(np.float64)


def generate_batch(g: Graph, spec: BatchSpec, rng: np.random.Generator | None = None) -> BatchUpdate:
    """Draw a random batch for ``g``.

    Parameters
    ----------
    g : Graph
    spec : BatchSpec
    rng : numpy Generator, optional
        Overrides ``spec.seed``; the sweep passes one per repetition.

    Raises
    ------
    ValueError
        If the graph has too few edges or non-edges for the requested batch,
        or insertion sampling exceeds its retry budget.
    """
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    n = g.vertex_count
    src, dst, w = _undirected_edges(g)
    n_ins, n_del = batch_counts(g.edge_count, spec)
    if n_ins + n_del == 0:
        return BatchUpdate.empty()
    if n < 2:
        raise ValueError("graph has fewer than two vertices")
    if n_del > len(src):
        raise ValueError(f"cannot delete {n_del} of {len(src)} edges")
    free = n * (n - 1) // 2 - int(np.count_nonzero(src != dst))
    if n_ins > free:
        raise ValueError(f"cannot insert {n_ins} edges, only {free} non-edges")

    existing = set((src * n + dst).tolist())  # self-loops never collide: i != j
    chosen: dict[int, None] = {}
    budget = RETRY_FACTOR * max(n_ins, 1)
    draws = 0
    while len(chosen) < n_ins:
        if draws >= budget:
            raise ValueError("insertion sampling exceeded its retry budget")
        i, j = rng.integers(0, n, size=2)
        draws += 1
        if i == j:
            continue
        key = int(min(i, j)) * n + int(max(i, j))
        if key in existing or key in chosen:
            continue
        chosen[key] = None
    keys = np.fromiter(chosen, dtype=np.int64, count=len(chosen))
    ins = np.column_stack([keys // n, keys % n])

    pick = rng.choice(len(src), size=n_del, replace=False) if n_del else np.zeros(0, np.int64)
    dels = np.column_stack([src[pick], dst[pick]]).astype(np.int64)
    dw = w[pick]

    # a deleted self-loop is a single record
    loop = dels[:, 0] == dels[:, 1]
    return BatchUpdate(
        deletions=np.concatenate([dels, dels[~loop, ::-1]]),
        insertions=np.concatenate([ins, ins[:, ::-1]]),
        insertion_weights=np.ones(2 * len(ins)),
        deletion_weights=np.concatenate([dw, dw[~loop]]),
    )


def write_batch(b: BatchUpdate, path) -> None:
    """One directed record per line: ``D i j`` or ``I i j w``."""
    lines = [f"D {i} {j}" for i, j in b.deletions]
    lines += [f"I {i} {j} {w:g}" for (i, j), w in zip(b.insertions, b.insertion_weights)]
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_batch(path) -> BatchUpdate:
    dels, ins, iw = [], [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0].upper()
        try:
            if tag == "D" and len(parts) == 3:
                dels.append((int(parts[1]), int(parts[2])))
            elif tag == "I" and len(parts) in (3, 4):
                ins.append((int(parts[1]), int(parts[2])))
                iw.append(float(parts[3]) if len(parts) == 4 else 1.0)
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed batch record {raw!r}") from None
    return BatchUpdate(
        deletions=np.array(dels, np.int64).reshape(-1, 2),
        insertions=np.array(ins, np.int64).reshape(-1, 2),
        insertion_weights=np.array(iw, np.float64),
    )
