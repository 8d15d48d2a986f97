"""scikit-learn style front-end over the static and dynamic runs."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph, check_membership
from .dynamic import DynamicContext, delta_screening, dynamic_frontier, naive_dynamic
from .graph import BatchUpdate, apply_batch, normalize_batch
from .leiden import AffectedHooks, LeidenParams, changed_communities, leiden
from .quality import modularity

_UPDATERS = {"nd": naive_dynamic, "ds": delta_screening, "df": dynamic_frontier}


class DynamicLeiden(ClusterMixin, BaseEstimator):
    """Leiden community detection that can follow a changing graph.

    Parameters
    ----------
    strategy : {"df", "ds", "nd"}
        How :meth:`update` picks the vertices to reprocess.
    tolerance, tolerance_drop, max_iterations, max_passes,
    aggregation_tolerance, chunk_size_main, chunk_size_aggregation,
    threads, seed :
        See :class:`dynleiden.leiden.LeidenParams`.

    Attributes
    ----------
    labels_ : ndarray of int
        Community of every vertex of the current snapshot.
    graph_ : Graph
        Current snapshot.
    modularity_ : float
    report_ : RunReport
        Report of the most recent run.
    """

    def __init__(
        self,
        strategy="df",
        tolerance=1e-2,
        tolerance_drop=10.0,
        max_iterations=20,
        max_passes=10,
        aggregation_tolerance=0.8,
        chunk_size_main=2048,
        chunk_size_aggregation=None,
        threads=1,
        seed=0,
    ):
        self.strategy = strategy
        self.tolerance = tolerance
        self.tolerance_drop = tolerance_drop
        self.max_iterations = max_iterations
        self.max_passes = max_passes
        self.aggregation_tolerance = aggregation_tolerance
        self.chunk_size_main = chunk_size_main
        self.chunk_size_aggregation = chunk_size_aggregation
        self.threads = threads
        self.seed = seed

    def _params(self) -> LeidenParams:
        if self.strategy not in _UPDATERS:
            raise ValueError(f"strategy must be one of {sorted(_UPDATERS)}, got {self.strategy!r}")
        return LeidenParams(
            tolerance=self.tolerance,
            tolerance_drop=self.tolerance_drop,
            max_iterations=self.max_iterations,
            max_passes=self.max_passes,
            aggregation_tolerance=self.aggregation_tolerance,
            chunk_size_main=self.chunk_size_main,
            chunk_size_aggregation=self.chunk_size_aggregation,
            threads=self.threads,
            seed=self.seed,
        )

    def fit(self, X, y=None, init=None):
        """Detect communities of graph ``X``.

        ``init`` optionally seeds the run with a starting membership; every
        vertex is still reprocessed.
        """
        params = self._params()
        g = check_graph(X)
        n = g.vertex_count
        c0 = np.arange(n, dtype=np.int64) if init is None else check_membership(init, n)
        ctx = DynamicContext.from_membership(g, c0)
        labels, report = leiden(
            g, ctx.c_prev, ctx.k_prev, ctx.sigma_prev,
            AffectedHooks.all(n), changed_communities(g, c0, None, dynamic=False),
            params, dynamic=False,
        )
        self._finish(g, labels, DynamicContext.from_membership(g, labels), report, "static")
        return self

    def update(self, batch: BatchUpdate):
        """Apply ``batch`` to the current snapshot and update ``labels_``."""
        check_is_fitted(self, "labels_")
        eff, skipped = normalize_batch(self.graph_, batch)
        g_t = apply_batch(self.graph_, eff)
        labels, k, sigma, report = _UPDATERS[self.strategy](g_t, eff, self.context_, self._params())
        report.skipped_updates = skipped
        self._finish(g_t, labels, DynamicContext(labels, k, sigma), report, self.strategy)
        return self

    def _finish(self, g, labels, ctx, report, name):
        self.graph_ = g
        self.labels_ = labels
        self.context_ = ctx
        self.modularity_ = modularity(g, labels)
        report.algorithm = name
        report.modularity = self.modularity_
        self.report_ = report
        self.n_communities_ = int(len(np.unique(labels)))

    def predict(self, X=None):
        """Labels of the current snapshot (``X`` is accepted for API symmetry)."""
        check_is_fitted(self, "labels_")
        return self.labels_

    def score(self, X=None, y=None) -> float:
        """Modularity of ``labels_`` on ``X`` (default: the current snapshot)."""
        check_is_fitted(self, "labels_")
        g = self.graph_ if X is None else check_graph(X)
        return modularity(g, self.labels_)
