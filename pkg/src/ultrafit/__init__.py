"""Ultrametric fitting on sparse edge-weighted graphs by gradient descent.

The pipeline: build a connected graph with dissimilarity edge weights,
project weights onto the nearest-from-below ultrametric with
:func:`subdominant`, descend a differentiable cost through the projection
with :func:`fit`, and read the result as a dendrogram or a flat clustering.
"""
from .costs import (
    Closest,
    ClusterSize,
    CostSpec,
    Dasgupta,
    Triplet,
    TripletSet,
    cost_closest,
    cost_cluster_size,
    cost_composite,
    cost_dasgupta,
    cost_triplet,
    soft_cardinal,
)
from .errors import (
    NonFiniteCostError,
    NumericalError,
    ParseError,
    UltrafitError,
    ValidationError,
)
from .fitting import FitConfig, FitResult, fit, normalize_trace
from .graph import Graph, build_graph, ensure_weights, is_ultrametric
from .hierarchy import (
    Dendrogram,
    NodeAttributes,
    cut_to_k_clusters,
    format_linkage_matrix,
    node_attributes,
    parse_linkage_matrix,
    single_linkage,
)
from .lca import LcaIndex, build_lca, lca
from .preprocessing import PointSet, knn_mst_graph, sample_triplets
from .subdominant import SubdominantResult, subdominant, subdominant_vjp

__version__ = "0.1.0"

__all__ = [
    "Closest",
    "ClusterSize",
    "CostSpec",
    "Dasgupta",
    "Dendrogram",
    "FitConfig",
    "FitResult",
    "Graph",
    "LcaIndex",
    "NodeAttributes",
    "NonFiniteCostError",
    "NumericalError",
    "ParseError",
    "PointSet",
    "SubdominantResult",
    "Triplet",
    "TripletSet",
    "UltrafitError",
    "ValidationError",
    "build_graph",
    "build_lca",
    "cost_closest",
    "cost_cluster_size",
    "cost_composite",
    "cost_dasgupta",
    "cost_triplet",
    "cut_to_k_clusters",
    "ensure_weights",
    "fit",
    "format_linkage_matrix",
    "is_ultrametric",
    "knn_mst_graph",
    "lca",
    "node_attributes",
    "normalize_trace",
    "parse_linkage_matrix",
    "sample_triplets",
    "single_linkage",
    "soft_cardinal",
    "subdominant",
    "subdominant_vjp",
]
