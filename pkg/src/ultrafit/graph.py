"""Sparse undirected graphs with stable edge indexing.

Edge ids are assigned in input order, and weight vectors always bind to
edge ids, never to vertex pairs.  Reordering an edge list therefore
produces different ids; file formats document this.  Graphs are immutable
after construction and safe to share read-only across threads.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    LengthMismatchError,
    SelfLoopError,
    ValidationError,
    VertexOutOfRangeError,
)


class Graph:
    """Immutable connected undirected graph with contiguous edge ids 0..M-1.

    Use :func:`build_graph` to construct; the constructor assumes already
    validated inputs.
    """

    __slots__ = ("vertex_count", "edges", "_indptr", "_nbr", "_eid")

    def __init__(self, vertex_count: int, edges: np.ndarray):
        self.vertex_count = int(vertex_count)
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        self.edges = edges
        # CSR adjacency over both directions of every edge.
        n, m = self.vertex_count, edges.shape[0]
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        nbr = dst[order]
        eid = eids[order]
        for a in (indptr, nbr, eid):
            a.setflags(write=False)
        self._indptr, self._nbr, self._eid = indptr, nbr, eid

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor vertices of ``v`` and the ids of the connecting edges."""
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return self._nbr[lo:hi], self._eid[lo:hi]

    def __repr__(self) -> str:
        return f"Graph(vertex_count={self.vertex_count}, edge_count={self.edge_count})"


def build_graph(vertex_count: int, edge_pairs) -> Graph:
    """Validate an edge list and build a :class:`Graph`.

    Edge ids follow the order of ``edge_pairs``.  Self-loops and duplicate
    unordered pairs are rejected (one dissimilarity per pair; silent merging
    would hide data bugs), and the graph must be connected because every
    downstream algorithm assumes it.
    """
    n = int(vertex_count)
    if n <= 0:
        raise ValidationError(f"vertex_count must be positive, got {n}")
    pairs = np.asarray(list(edge_pairs), dtype=np.int64).reshape(-1, 2)
    m = pairs.shape[0]

    bad = (pairs < 0) | (pairs >= n)
    if bad.any():
        e = int(np.flatnonzero(bad.any(axis=1))[0])
        raise VertexOutOfRangeError(
            f"edge {e} = ({pairs[e, 0]}, {pairs[e, 1]}) references a vertex "
            f"outside [0, {n})"
        )
    loops = pairs[:, 0] == pairs[:, 1]
    if loops.any():
        e = int(np.flatnonzero(loops)[0])
        raise SelfLoopError(f"edge {e} is a self-loop on vertex {pairs[e, 0]}")

    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    key = lo * n + hi
    _, first, counts = np.unique(key, return_index=True, return_counts=True)
    if (counts > 1).any():
        dup_key = key[np.sort(first[counts > 1])[0]]
        dups = np.flatnonzero(key == dup_key)
        raise DuplicateEdgeError(
            f"edges {dups.tolist()} duplicate the pair "
            f"({dup_key // n}, {dup_key % n})"
        )

    g = Graph(n, pairs)
    seen = _reachable_from_zero(g)
    if not seen.all():
        v = int(np.flatnonzero(~seen)[0])
        raise DisconnectedError(f"vertex {v} is not reachable from vertex 0")
    return g


def _reachable_from_zero(g: Graph) -> np.ndarray:
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import breadth_first_order

    n = g.vertex_count
    seen = np.zeros(n, dtype=bool)
    if g.edge_count == 0:
        seen[0] = True
        return seen
    mat = csr_matrix(
        (np.ones(2 * g.edge_count, dtype=np.int8), g._nbr, g._indptr), shape=(n, n)
    )
    reach = breadth_first_order(mat, 0, directed=True, return_predecessors=False)
    seen[reach] = True
    return seen


def ensure_weights(g: Graph, values, nonnegative: bool = False) -> np.ndarray:
    """Coerce ``values`` to a float64 edge weight vector for ``g``.

    Checks length and finiteness; ``nonnegative=True`` additionally rejects
    negative entries (required when the vector denotes an input dissimilarity
    or an ultrametric, but not for an optimization variable in flight).
    """
    w = np.ascontiguousarray(values, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != g.edge_count:
        raise LengthMismatchError(
            f"expected {g.edge_count} edge weights, got shape {w.shape}"
        )
    if not np.isfinite(w).all():
        raise ValidationError("edge weights must be finite")
    if nonnegative and (w < 0).any():
        e = int(np.argmax(w < 0))
        raise ValidationError(f"edge {e} has negative weight {w[e]}")
    return w


def is_ultrametric(g: Graph, u, tol: float = 1e-9) -> bool:
    """Check whether ``u`` is an ultrametric on ``g``.

    A weight vector is ultrametric iff it is a fixed point of the min-max
    operator; this tests ``max_e |u(e) - minmax(u)(e)| <= tol``.  Acyclic
    graphs are always ultrametric.
    """
    from .subdominant import subdominant  # deferred: avoids an import cycle

    u = ensure_weights(g, u, nonnegative=True)
    if tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    res = subdominant(g, u)
    return bool(np.max(np.abs(u - res.u), initial=0.0) <= tol)
