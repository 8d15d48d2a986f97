"""Parallel static and dynamic Leiden community detection."""

from .batch import BatchSpec, generate_batch, read_batch, write_batch
from .dynamic import (
    DynamicContext,
    delta_screening,
    dynamic_frontier,
    naive_dynamic,
    update_weights,
)
from .estimator import DynamicLeiden
from .graph import BatchUpdate, Graph, GraphError, apply_batch, build_graph, normalize_batch, total_edge_weight
from .leiden import AffectedHooks, CommunityState, LeidenParams, leiden, static_leiden
from .quality import audit_connectivity, delta_modularity, modularity, partition_stats
from .report import RunReport, emit_report, load_report

__version__ = "0.1.0"

__all__ = [
    "AffectedHooks",
    "BatchSpec",
    "BatchUpdate",
    "CommunityState",
    "DynamicContext",
    "DynamicLeiden",
    "Graph",
    "GraphError",
    "LeidenParams",
    "RunReport",
    "apply_batch",
    "audit_connectivity",
    "build_graph",
    "delta_modularity",
    "delta_screening",
    "dynamic_frontier",
    "emit_report",
    "generate_batch",
    "leiden",
    "load_report",
    "modularity",
    "naive_dynamic",
    "normalize_batch",
    "partition_stats",
    "read_batch",
    "static_leiden",
    "total_edge_weight",
    "update_weights",
    "write_batch",
]
