"""Input coercion shared by the estimator front-end."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.utils import check_array

from .graph import Graph, GraphError, build_graph, validate_graph


def check_graph(X) -> Graph:
    """Accept a :class:`Graph`, a square scipy sparse matrix or a dense array.

    Matrices are read as weighted adjacency; the diagonal is ignored and
    the upper and lower triangles are merged (the last value read wins).
    """
    if isinstance(X, Graph):
        validate_graph(X)
        return X
    A = check_array(X, accept_sparse=("csr", "csc", "coo"), dtype=np.float64)
    if A.shape[0] != A.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {A.shape}")
    coo = sp.coo_matrix(A)
    keep = (coo.row != coo.col) & (coo.data != 0)
    if np.any(coo.data[keep] < 0):
        raise GraphError("adjacency has negative weights")
    edges = np.column_stack([coo.row[keep], coo.col[keep], coo.data[keep]])
    return build_graph(edges, A.shape[0])


def check_membership(c, n: int) -> np.ndarray:
    """1-D integer labels of length ``n``, relabelled to vertex ids ``0..k-1``."""
    c = np.asarray(c)
    if c.ndim != 1 or len(c) != n:
        raise ValueError(f"membership must be 1-D of length {n}")
    _, dense = np.unique(c, return_inverse=True)
    return dense.astype(np.int64)
