"""Projection of edge weights onto the nearest-from-below ultrametric.

For a connected graph with edge weights ``w``, the subdominant ultrametric
assigns each edge the min-max path value: the minimum over all connecting
paths of the largest weight along the path.  It is the largest ultrametric
pointwise below ``w`` and coincides with single-linkage clustering: the
value on edge (x, y) is the altitude of the lowest dendrogram node
containing both endpoints, and that altitude is realized by the node's
canonical minimum-spanning-tree edge (the *pass edge*, a fixed tie-break
when several edges qualify).

The operator is piecewise linear in ``w``.  Holding the single-linkage tree
fixed, its Jacobian is a 0/1 matrix with exactly one 1 per row (edge i maps
to its pass edge), so the vector-Jacobian product is a scatter-add.  This is
what makes gradient descent through the projection cheap: one O(M log M)
tree build per evaluation, O(M) for the backward pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, ensure_weights
from .hierarchy import Dendrogram, single_linkage
from .lca import LcaIndex, build_lca, lca


@dataclass(frozen=True)
class SubdominantResult:
    """Projection output plus the structures needed for gradients.

    ``u[i] == weights[pass_edge[i]]`` and ``pass_node[i]`` is the
    single-linkage LCA of edge i's endpoints (an internal node id).
    """

    u: np.ndarray          # (M,) float64 ultrametric values
    pass_edge: np.ndarray  # (M,) int64 edge ids
    pass_node: np.ndarray  # (M,) int64 internal node ids
    tree: Dendrogram
    lca: LcaIndex
    graph: Graph

    def __post_init__(self):
        for a in (self.u, self.pass_edge, self.pass_node):
            a.setflags(write=False)


def subdominant(g: Graph, weights) -> SubdominantResult:
    """Project ``weights`` onto the subdominant ultrametric of ``g``.

    Weights may be arbitrary finite floats (no sign constraint); the output
    satisfies ``u <= weights`` elementwise with equality on a spanning tree,
    and ``subdominant(g, u).u == u`` (idempotence).
    """
    w = ensure_weights(g, weights)
    tree = single_linkage(g, w)
    index = build_lca(tree)
    pass_node = lca(index, g.edges[:, 0], g.edges[:, 1])
    pass_edge = tree.canonical_edge[pass_node - g.vertex_count]
    return SubdominantResult(
        u=w[pass_edge],
        pass_edge=pass_edge,
        pass_node=pass_node,
        tree=tree,
        lca=index,
        graph=g,
    )


def subdominant_vjp(result: SubdominantResult, upstream) -> np.ndarray:
    """Pull a cost gradient on ``u`` back to a gradient on the weights.

    With the single-linkage tree held fixed, du[i]/dw[j] is 1 when
    j == pass_edge[i] and 0 otherwise, so each upstream component
    accumulates onto its pass edge.
    """
    up = np.ascontiguousarray(upstream, dtype=np.float64)
    if up.shape != result.u.shape:
        raise ValueError(
            f"upstream shape {up.shape} does not match u shape {result.u.shape}"
        )
    grad = np.zeros_like(result.u)
    np.add.at(grad, result.pass_edge, up)
    return grad
