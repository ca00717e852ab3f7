"""Single-linkage dendrograms and per-node attributes.

A dendrogram over N leaves has 2N-1 nodes: leaves 0..N-1 (one per graph
vertex) and internal nodes N..2N-2 in merge order, each with exactly two
children.  Merge order guarantees that node index order is non-decreasing
in altitude and that every internal node's index exceeds its children's.

Construction follows Kruskal's minimum-spanning-tree algorithm: edges are
processed in non-decreasing weight order (ties broken by ascending edge id,
which makes dendrograms deterministic and reproducible) and each union of
two clusters creates one internal node whose *canonical edge* is the edge
that caused the merge.  The canonical edges form a minimum spanning tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._accel import merge_forest
from .errors import KOutOfRangeError, ParseError, ValidationError
from .graph import Graph, ensure_weights


@dataclass(frozen=True)
class Dendrogram:
    """Rooted binary merge tree with per-node altitudes and sizes.

    Arrays indexed by internal node use the *internal index* j = node - N,
    j in [0, N-1).  ``canonical_edge`` is None for trees not built from a
    graph (e.g. parsed linkage matrices).
    """

    num_leaves: int
    parent: np.ndarray  # (2N-1,) int64; -1 at the root
    children: np.ndarray  # (N-1, 2) int64
    altitudes: np.ndarray  # (N-1,) float64
    sizes: np.ndarray  # (2N-1,) int64
    canonical_edge: np.ndarray | None = None  # (N-1,) int64 edge ids

    def __post_init__(self):
        for a in (self.parent, self.children, self.altitudes, self.sizes,
                  self.canonical_edge):
            if a is not None:
                a.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return 2 * self.num_leaves - 1

    @property
    def root(self) -> int:
        return self.num_nodes - 1

    @property
    def ranks(self) -> np.ndarray:
        """Rank per internal node: 1 = root (highest altitude), N-1 = lowest.

        Because altitudes are non-decreasing in node index and ties break
        toward the later-created node, rank is simply the reversed internal
        index.
        """
        n = self.num_leaves
        return np.arange(n - 1, 0, -1, dtype=np.int64)

    def ancestors(self, node: int) -> Iterator[int]:
        """Strict ancestors of ``node``, bottom-up, ending at the root."""
        p = self.parent[node]
        while p != -1:
            yield int(p)
            p = self.parent[p]

    def sibling(self, parent_node: int, child_node: int) -> int:
        """The child of ``parent_node`` other than ``child_node``."""
        c = self.children[parent_node - self.num_leaves]
        return int(c[0] + c[1] - child_node)


@dataclass(frozen=True)
class NodeAttributes:
    """Derived per-internal-node quantities.

    ``gamma[j]`` is the size of the smallest child of internal node j.
    Ancestor iteration and sibling selection live on :class:`Dendrogram`.
    """

    gamma: np.ndarray  # (N-1,) int64


def single_linkage(g: Graph, weights) -> Dendrogram:
    """Single-linkage dendrogram of ``(g, weights)``.

    Negative weights are permitted: only the edge ordering matters.  Runs in
    O(M log M) (stable sort plus near-linear union-find).
    """
    w = ensure_weights(g, weights)
    n = g.vertex_count
    if n == 1:
        return Dendrogram(
            num_leaves=1,
            parent=np.array([-1], dtype=np.int64),
            children=np.empty((0, 2), dtype=np.int64),
            altitudes=np.empty(0, dtype=np.float64),
            sizes=np.ones(1, dtype=np.int64),
            canonical_edge=np.empty(0, dtype=np.int64),
        )
    order = np.argsort(w, kind="stable")
    ex = np.ascontiguousarray(g.edges[:, 0])
    ey = np.ascontiguousarray(g.edges[:, 1])
    children, canonical, merges = merge_forest(order, ex, ey, n)
    if merges != n - 1:
        # unreachable for validated graphs; guards ad-hoc callers
        raise ValidationError("graph is not connected")
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    parent[children[:, 0]] = np.arange(n, 2 * n - 1)
    parent[children[:, 1]] = np.arange(n, 2 * n - 1)
    sizes = np.ones(2 * n - 1, dtype=np.int64)
    for j in range(n - 1):
        sizes[n + j] = sizes[children[j, 0]] + sizes[children[j, 1]]
    return Dendrogram(
        num_leaves=n,
        parent=parent,
        children=children,
        altitudes=w[canonical],
        sizes=sizes,
        canonical_edge=canonical,
    )


def node_attributes(t: Dendrogram) -> NodeAttributes:
    """Min-child-size gamma for every internal node, in one O(N) pass."""
    c = t.children
    gamma = np.minimum(t.sizes[c[:, 0]], t.sizes[c[:, 1]])
    return NodeAttributes(gamma=gamma)


def cut_to_k_clusters(t: Dendrogram, k: int) -> np.ndarray:
    """Flat clustering with ``k`` clusters by removing the k-1 highest merges.

    Removes the internal nodes of smallest rank (highest altitude, ties
    toward later-created nodes) and labels the connected components of the
    remaining forest 0..k-1 in order of their smallest contained vertex id.
    """
    n = t.num_leaves
    if not 1 <= k <= n:
        raise KOutOfRangeError(f"k must be in [1, {n}], got {k}")
    keep_below = 2 * n - k  # node ids >= this are removed
    comp = np.arange(t.num_nodes, dtype=np.int64)
    for node in range(t.root, n - 1, -1):
        if node < keep_below:
            c = t.children[node - n]
            comp[c[0]] = comp[node]
            comp[c[1]] = comp[node]
    roots = comp[:n]
    _, labels = np.unique(roots, return_inverse=True)
    # np.unique sorts by component id, not by smallest member; remap so that
    # labels appear in first-occurrence order over vertices 0..N-1
    remap = np.full(labels.max() + 1, -1, dtype=np.int64)
    nxt = 0
    out = np.empty(n, dtype=np.int64)
    for v in range(n):
        lab = labels[v]
        if remap[lab] < 0:
            remap[lab] = nxt
            nxt += 1
        out[v] = remap[lab]
    return out


def format_linkage_matrix(t: Dendrogram) -> str:
    """Serialize as text: one line per internal node, ``child1 child2 altitude
    size``, altitudes printed with 17 significant digits (lossless for
    float64)."""
    lines = []
    for j in range(t.num_leaves - 1):
        c0, c1 = t.children[j]
        lines.append(
            f"{c0} {c1} {t.altitudes[j]:.17g} {t.sizes[t.num_leaves + j]}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


def parse_linkage_matrix(text: str) -> Dendrogram:
    """Parse the output of :func:`format_linkage_matrix`.

    Validates tree structure, size consistency, and the merge-order altitude
    invariant.  The result carries no canonical edges.
    """
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    n = len(rows) + 1
    children = np.empty((n - 1, 2), dtype=np.int64)
    altitudes = np.empty(n - 1, dtype=np.float64)
    sizes = np.ones(2 * n - 1, dtype=np.int64)
    for j, row in enumerate(rows):
        if len(row) != 4:
            raise ParseError(f"linkage line {j + 1}: expected 4 fields, got {len(row)}")
        try:
            c0, c1 = int(row[0]), int(row[1])
            alt = float(row[2])
            size = int(row[3])
        except ValueError as exc:
            raise ParseError(f"linkage line {j + 1}: {exc}") from None
        node = n + j
        for c in (c0, c1):
            if not 0 <= c < node:
                raise ParseError(
                    f"linkage line {j + 1}: child {c} out of range [0, {node})"
                )
        if c0 == c1:
            raise ParseError(f"linkage line {j + 1}: identical children {c0}")
        children[j] = (c0, c1)
        altitudes[j] = alt
        sizes[node] = size
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    for j in range(n - 1):
        for c in children[j]:
            if parent[c] != -1:
                raise ParseError(f"node {c} has two parents")
            parent[c] = n + j
    if n > 1 and (parent[: 2 * n - 2] == -1).any():
        orphan = int(np.flatnonzero(parent[: 2 * n - 2] == -1)[0])
        raise ParseError(f"node {orphan} is unattached (not a single tree)")
    expect = sizes[children[:, 0]] + sizes[children[:, 1]]
    if (sizes[n:] != expect).any():
        j = int(np.flatnonzero(sizes[n:] != expect)[0])
        raise ParseError(
            f"linkage line {j + 1}: size {sizes[n + j]} != sum of children {expect[j]}"
        )
    if n > 2 and (np.diff(altitudes) < 0).any():
        j = int(np.flatnonzero(np.diff(altitudes) < 0)[0])
        raise ParseError(
            f"linkage line {j + 2}: altitude decreases ({altitudes[j + 1]} after "
            f"{altitudes[j]}); merge order requires non-decreasing altitudes"
        )
    return Dendrogram(
        num_leaves=n,
        parent=parent,
        children=children,
        altitudes=altitudes,
        sizes=sizes,
        canonical_edge=None,
    )
