"""From point clouds to fitting-ready sparse graphs.

The standard construction connects each point to its k nearest neighbors
(union symmetrization: an edge is kept when either endpoint selects the
other) and adds the edges of a Euclidean minimum spanning tree so the graph
is connected even across well-separated clusters.  Edge weights are
Euclidean distances.

Pairwise distances are formed densely, so this is meant for desk-scale
point sets (N up to ~10^4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import squareform, pdist

from .errors import (
    InsufficientClassesError,
    KOutOfRangeError,
    LengthMismatchError,
    ValidationError,
)
from .graph import Graph, build_graph


@dataclass(frozen=True)
class PointSet:
    """Points in d-dimensional Euclidean space with optional class labels.

    ``labels`` is an integer array of length N where -1 marks an unlabeled
    point; None means fully unlabeled.
    """

    points: np.ndarray  # (N, d) float64
    labels: np.ndarray | None = None  # (N,) int64, -1 = unlabeled

    def __post_init__(self):
        p = np.ascontiguousarray(np.atleast_2d(self.points), dtype=np.float64)
        if p.ndim != 2 or p.shape[1] < 1:
            raise ValidationError(f"points must be (N, d) with d >= 1, got {p.shape}")
        if not np.isfinite(p).all():
            raise ValidationError("points contain non-finite coordinates")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        if self.labels is not None:
            lab = np.ascontiguousarray(self.labels, dtype=np.int64)
            if lab.shape != (len(p),):
                raise LengthMismatchError(
                    f"labels length {lab.shape} != point count {len(p)}"
                )
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return len(self.points)


def knn_mst_graph(pts: PointSet, k: int) -> tuple[Graph, np.ndarray]:
    """k-nearest-neighbor graph augmented with Euclidean MST edges.

    Returns the graph and its Euclidean edge weights.  Duplicate points are
    fine — they yield zero-weight edges.  Connected by construction, which
    :func:`~ultrafit.graph.build_graph` re-verifies.
    """
    n = len(pts)
    if n < 2:
        raise ValidationError(f"need at least 2 points, got {n}")
    if not 1 <= k < n:
        raise KOutOfRangeError(f"k must be in [1, {n - 1}], got {k}")
    d = squareform(pdist(pts.points))

    # k smallest off-diagonal entries per row
    idx = np.argpartition(d + np.diag(np.full(n, np.inf)), k, axis=1)[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = idx.ravel()

    # scipy's sparse MST treats stored zeros as absent edges, so duplicate
    # points (distance 0) are bumped to a tiny positive value; they still
    # sort first, and the reported weights use the true distances
    d_mst = np.where(d == 0, 1e-300, d)
    np.fill_diagonal(d_mst, 0.0)
    mst = minimum_spanning_tree(csr_matrix(d_mst)).tocoo()

    x = np.concatenate([rows, mst.row])
    y = np.concatenate([cols, mst.col])
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    g = build_graph(n, pairs)
    return g, d[g.edges[:, 0], g.edges[:, 1]]


def sample_triplets(labels, count: int, seed: int = 0):
    """Uniform sample (with replacement) of ``count`` valid triples.

    A triple (ref, pos, neg) is valid when all three points are labeled,
    ref and pos share a class without being the same point, and neg belongs
    to a different class.  ``labels`` uses -1 for unlabeled points.
    Deterministic per seed.
    """
    from .costs import TripletSet

    if count < 0:
        raise ValidationError(f"count must be >= 0, got {count}")
    lab = np.ascontiguousarray(labels, dtype=np.int64)
    labeled = np.flatnonzero(lab >= 0)
    if count == 0:
        return TripletSet(np.empty((0, 3), dtype=np.int64))
    classes, counts = np.unique(lab[labeled], return_counts=True)
    total = len(labeled)
    # number of valid triples per class: ordered (ref, pos) pairs inside,
    # any labeled outsider as neg
    weight = counts * (counts - 1) * (total - counts)
    if weight.sum() == 0:
        raise InsufficientClassesError(
            "need a class with >= 2 labeled members plus a labeled point "
            "of another class"
        )
    rng = np.random.default_rng(seed)
    probs = weight / weight.sum()
    members = {c: labeled[lab[labeled] == c] for c in classes}
    out = np.empty((count, 3), dtype=np.int64)
    pick = rng.choice(len(classes), size=count, p=probs)
    for i, ci in enumerate(pick):
        mem = members[classes[ci]]
        r, p = rng.choice(len(mem), size=2, replace=False)
        others = labeled[lab[labeled] != classes[ci]]
        out[i] = (mem[r], mem[p], others[rng.integers(len(others))])
    return TripletSet(out)
