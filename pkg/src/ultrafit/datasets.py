"""Synthetic inputs for experiments, benchmarks, and acceptance checks.

Everything here is deterministic given the seed.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .graph import Graph, build_graph
from .preprocessing import PointSet


def two_clusters_with_outlier(
    n_per_cluster: int = 60,
    separation: float = 3.0,
    spread: float = 0.18,
    outlier_offset: tuple[float, float] = (0.8, 3.2),
    seed: int = 0,
) -> PointSet:
    """Two Gaussian blobs plus one far-off point whose graph edge is a bridge.

    The blobs sit ``separation`` apart on the x axis; the extra point hangs
    above the first blob, farther from either blob than they are from each
    other.  Under a nearest-neighbor graph its only connection is the MST
    edge — the classic case where an unregularized fit branches a singleton
    at the very top of the dendrogram.  The outlier carries the label of the
    nearer blob (class 0); classes are 0 and 1.
    """
    rng = np.random.default_rng(seed)
    a = rng.normal((0.0, 0.0), spread, size=(n_per_cluster, 2))
    b = rng.normal((separation, 0.0), spread, size=(n_per_cluster, 2))
    out = np.asarray(outlier_offset, dtype=np.float64)[None, :]
    points = np.vstack([a, b, out])
    labels = np.concatenate([
        np.zeros(n_per_cluster, dtype=np.int64),
        np.ones(n_per_cluster, dtype=np.int64),
        np.zeros(1, dtype=np.int64),
    ])
    return PointSet(points=points, labels=labels)


def random_connected_graph(
    n_vertices: int, n_edges: int, seed: int = 0
) -> tuple[Graph, np.ndarray]:
    """Uniform-ish random connected graph with ``n_edges`` edges and uniform
    (0.01, 1.01) weights.

    A random spanning tree guarantees connectivity; the remaining edges are
    sampled uniformly among non-tree pairs.  Fully vectorized — fine for
    millions of edges.
    """
    n, m = n_vertices, n_edges
    max_edges = n * (n - 1) // 2
    if not n - 1 <= m <= max_edges:
        raise ValidationError(
            f"edge count must be in [{n - 1}, {max_edges}] for {n} vertices, got {m}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    attach = (rng.random(n - 1) * np.arange(1, n)).astype(np.int64)
    tree_x = perm[1:]
    tree_y = perm[attach]
    lo = np.minimum(tree_x, tree_y)
    hi = np.maximum(tree_x, tree_y)
    keys = set((lo.astype(np.int64) * n + hi).tolist())
    pairs = [np.stack([lo, hi], axis=1)]
    need = m - (n - 1)
    while need > 0:
        x = rng.integers(0, n, size=int(need * 1.5) + 16)
        y = rng.integers(0, n, size=len(x))
        ok = x != y
        plo, phi = np.minimum(x[ok], y[ok]), np.maximum(x[ok], y[ok])
        k = plo.astype(np.int64) * n + phi
        k = np.array(sorted(set(k.tolist()) - keys), dtype=np.int64)[:need]
        if len(k):
            keys.update(k.tolist())
            pairs.append(np.stack([k // n, k % n], axis=1))
            need -= len(k)
    edge_pairs = np.vstack(pairs)
    g = build_graph(n, edge_pairs)
    return g, rng.random(m) + 0.01
