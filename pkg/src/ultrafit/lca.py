"""Constant-time lowest-common-ancestor queries on dendrograms.

Classic Euler-tour reduction: the LCA of two nodes is the minimum-depth
node on the tour segment between their first visits, answered by a sparse
table of range-minimum positions.  Build is O(N log N); each query is O(1)
and batches are fully vectorized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import euler_tour
from .errors import NodeOutOfRangeError
from .hierarchy import Dendrogram


@dataclass(frozen=True)
class LcaIndex:
    """Preprocessed LCA structure for one dendrogram."""

    num_nodes: int
    first: np.ndarray   # (2N-1,) first tour position of each node
    euler: np.ndarray   # (L,) node at each tour position
    depth: np.ndarray   # (L,) depth at each tour position
    table: np.ndarray   # (levels, L) argmin-depth sparse table

    def __post_init__(self):
        for a in (self.first, self.euler, self.depth, self.table):
            a.setflags(write=False)


def build_lca(t: Dendrogram) -> LcaIndex:
    """Build the Euler-tour sparse table for ``t``."""
    euler, depth, first = euler_tour(t.children, t.num_leaves)
    m = len(euler)
    levels = max(1, m.bit_length())
    table = np.empty((levels, m), dtype=np.int64)
    table[0] = np.arange(m)
    for k in range(1, levels):
        half = 1 << (k - 1)
        span = m - (1 << k) + 1
        if span <= 0:
            table[k] = table[k - 1]
            continue
        left = table[k - 1, :span]
        right = table[k - 1, half:half + span]
        table[k, :span] = np.where(depth[right] < depth[left], right, left)
        table[k, span:] = table[k - 1, span:]
    return LcaIndex(num_nodes=t.num_nodes, first=first, euler=euler,
                    depth=depth.astype(np.int64), table=table)


def lca(index: LcaIndex, x, y):
    """Lowest common ancestor(s) of node ids ``x`` and ``y``.

    Scalar inputs give a scalar node id; equal-shape arrays are answered
    elementwise.  ``lca(i, v, v) == v`` and the result is symmetric in the
    arguments.
    """
    x_arr = np.asarray(x, dtype=np.int64)
    y_arr = np.asarray(y, dtype=np.int64)
    scalar = x_arr.ndim == 0 and y_arr.ndim == 0
    x_arr, y_arr = np.atleast_1d(x_arr), np.atleast_1d(y_arr)
    for a in (x_arr, y_arr):
        bad = (a < 0) | (a >= index.num_nodes)
        if bad.any():
            raise NodeOutOfRangeError(
                f"node {int(a[bad][0])} out of range [0, {index.num_nodes})"
            )
    lo = index.first[x_arr]
    hi = index.first[y_arr]
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    length = hi - lo + 1
    # floor(log2(length)) via the float exponent; exact for length < 2**53
    k = np.frexp(length.astype(np.float64))[1] - 1
    a = index.table[k, lo]
    b = index.table[k, hi - (1 << k) + 1]
    pos = np.where(index.depth[b] < index.depth[a], b, a)
    out = index.euler[pos]
    return int(out[0]) if scalar else out
