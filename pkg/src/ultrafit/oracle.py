"""Slow, obviously-correct references for tests and acceptance runs.

Nothing here is performance-tuned; every function either enumerates its
search space outright or runs a textbook cubic dynamic program.  They exist
to anchor the fast implementations:

- :func:`minmax_bruteforce` — all-pairs min-max path values by widest-path
  dynamic programming (Floyd-Warshall recurrence with (min, max) algebra).
- :func:`ultrametric_cycle_check` — the literal cycle condition: on every
  simple cycle, each edge is at most the maximum of the others.
- :func:`closest_ultrametric_exhaustive` — the global optimum of the
  squared-error fit over *all* ultrametrics, by enumerating every binary
  dendrogram shape and solving each shape's altitude problem exactly.
- :func:`average_linkage` — graph UPGMA baseline.
- :func:`finite_difference_grad` — central differences.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import TooLargeError, ValidationError
from .graph import Graph, build_graph, ensure_weights
from .hierarchy import Dendrogram

# ---------------------------------------------------------------------------
# min-max distances and the cycle condition


def minmax_bruteforce(g: Graph, w) -> np.ndarray:
    """All-pairs min-max path values, (N, N) symmetric with zero diagonal.

    Entry (x, y) is the minimum over connecting paths of the largest weight
    along the path.  Cubic in N; guarded at N <= 512.
    """
    n = g.vertex_count
    if n > 512:
        raise TooLargeError(f"minmax_bruteforce is cubic; N={n} > 512")
    w = ensure_weights(g, w)
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, -np.inf)
    x, y = g.edges[:, 0], g.edges[:, 1]
    d[x, y] = w
    d[y, x] = w
    for k in range(n):
        np.minimum(d, np.maximum(d[:, k, None], d[None, k, :]), out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _simple_cycles(g: Graph):
    """Every simple cycle as a list of edge ids, each cycle exactly once."""
    seen = set()
    for start in range(g.vertex_count):
        # paths start..current using intermediate vertices > start
        stack = [(start, [start], [])]
        while stack:
            v, path, eids = stack.pop()
            nbrs, adj_eids = g.neighbors(v)
            for u, eid in zip(nbrs, adj_eids):
                if u == start and len(path) >= 3:
                    key = frozenset(eids + [eid])
                    if key not in seen:
                        seen.add(key)
                        yield eids + [eid]
                elif u > start and u not in path:
                    stack.append((u, path + [u], eids + [eid]))


def ultrametric_cycle_check(g: Graph, u, tol: float = 1e-9) -> bool:
    """Literal quantification: every edge of every simple cycle is bounded
    by the maximum of the cycle's other edges (within ``tol``).

    Acyclic graphs pass vacuously.  Exponential; guarded at N <= 8.
    """
    if g.vertex_count > 8:
        raise TooLargeError(
            f"cycle enumeration is exponential; N={g.vertex_count} > 8"
        )
    u = ensure_weights(g, u)
    for cycle in _simple_cycles(g):
        vals = np.partition(u[cycle], len(cycle) - 2)
        # only the maximum edge can violate; it must not exceed the runner-up
        if vals[-1] > vals[-2] + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# exhaustive closest-ultrametric optimum


def _shapes(leaf_mask_list):
    """All unordered binary merge trees over the given leaves, each once.

    Trees are (left, right) nested tuples with leaf ids at the bottom.
    Uniqueness: the subtree containing the smallest leaf is always the left
    child, and the root split enumerates only subsets containing it.
    """
    if len(leaf_mask_list) == 1:
        yield leaf_mask_list[0]
        return
    rest = leaf_mask_list[1:]
    anchor = leaf_mask_list[0]
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            left_set = [anchor, *extra]
            right_set = [v for v in rest if v not in extra]
            if not right_set:
                continue
            for lt in _shapes(left_set):
                for rt in _shapes(right_set):
                    yield (lt, rt)


def _isotonic_tree(parent_idx, counts, means):
    """Exact weighted isotonic regression on a forest, increasing toward roots.

    minimize sum_i counts[i] * (r[i] - means[i])^2  s.t.  r[i] <= r[parent].
    Bottom-up block merging, always absorbing the largest violating child
    block; this is the tree analogue of pool-adjacent-violators and yields
    the exact optimum.  ``parent_idx[i] = -1`` marks roots; children must
    have smaller indices than parents.  All counts must be positive.
    """
    k = len(parent_idx)
    block = list(range(k))  # representative per node

    def find(i):
        while block[i] != i:
            block[i] = block[block[i]]
            i = block[i]
        return i

    bsum = [counts[i] * means[i] for i in range(k)]
    bcnt = [float(counts[i]) for i in range(k)]
    bval = list(means)
    # children blocks hanging under each block, by representative
    hang = {i: [] for i in range(k)}
    for i in range(k):  # children precede parents, so process in index order
        p = parent_idx[i]
        while True:
            kids = [c for c in hang[find(i)] if bval[find(c)] > bval[find(i)] + 0.0]
            if not kids:
                break
            worst = max(kids, key=lambda c: bval[find(c)])
            wb, ib = find(worst), find(i)
            bsum[ib] += bsum[wb]
            bcnt[ib] += bcnt[wb]
            bval[ib] = bsum[ib] / bcnt[ib]
            block[wb] = ib
            hang[ib].extend(c for c in hang[wb] if find(c) != ib)
            hang[ib] = [c for c in hang[ib] if find(c) != ib]
        if p >= 0:
            hang[p].append(i)
    # roots may still violate nothing above; final values by representative
    return np.array([bval[find(i)] for i in range(k)])


def closest_ultrametric_exhaustive(g: Graph, w) -> tuple[np.ndarray, float]:
    """Global minimizer of sum (u - w)^2 over all ultrametrics on ``g``.

    Enumerates all (2N-3)!! binary dendrogram shapes (945 at N=6).  For one
    shape, each internal node collects the edges whose endpoints first meet
    there; the squared error decomposes per node around the per-node mean
    weight, leaving an exact weighted isotonic problem in the node altitudes
    (children at most parents), solved by block merging.  Nodes collecting
    no edges are unconstrained and are spliced out of the ordering.
    Guarded at N <= 6.
    """
    n = g.vertex_count
    if n > 6:
        raise TooLargeError(f"shape enumeration is doubly factorial; N={n} > 6")
    w = ensure_weights(g, w, nonnegative=True)
    m = g.edge_count
    if n <= 2:
        return w.copy(), 0.0
    edge_masks = (1 << g.edges[:, 0]) | (1 << g.edges[:, 1])

    best_j = np.inf
    best_u = w.copy()
    for shape in _shapes(list(range(n))):
        # collect the internal nodes as leaf bitmasks, smallest sets first
        masks = []

        def visit(t):
            if isinstance(t, int):
                return 1 << t
            msk = visit(t[0]) | visit(t[1])
            masks.append(msk)
            return msk

        visit(shape)
        masks.sort(key=lambda x: bin(x).count("1"))
        parent = [-1] * len(masks)
        for i, msk in enumerate(masks):
            for j in range(i + 1, len(masks)):
                if msk & masks[j] == msk:
                    parent[i] = j
                    break
        # group edges by the smallest node containing both endpoints
        cnt = np.zeros(len(masks))
        s = np.zeros(len(masks))
        ssq = np.zeros(len(masks))
        edge_node = np.empty(m, dtype=np.int64)
        for e in range(m):
            em = int(edge_masks[e])
            node = next(i for i, msk in enumerate(masks) if em & msk == em)
            edge_node[e] = node
            cnt[node] += 1
            s[node] += w[e]
            ssq[node] += w[e] * w[e]
        pos = np.flatnonzero(cnt > 0)
        # splice zero-count nodes out: nearest populated ancestor
        remap = -np.ones(len(masks), dtype=np.int64)
        remap[pos] = np.arange(len(pos))
        par_pos = np.empty(len(pos), dtype=np.int64)
        for out_i, i in enumerate(pos):
            p = parent[i]
            while p != -1 and cnt[p] == 0:
                p = parent[p]
            par_pos[out_i] = -1 if p == -1 else remap[p]
        means = s[pos] / cnt[pos]
        r = _isotonic_tree(par_pos, cnt[pos], means)
        j_val = float(cnt[pos] @ (r - means) ** 2 + (ssq[pos].sum() - (s[pos] ** 2 / cnt[pos]).sum()))
        if j_val < best_j - 1e-15:
            best_j = j_val
            best_u = r[remap[edge_node]]
    return best_u, float(best_j)


# ---------------------------------------------------------------------------
# average-linkage baseline


def average_linkage(g: Graph, w) -> Dendrogram:
    """Graph UPGMA: merge the cluster pair with the smallest mean cross-edge
    weight; merged pairs pool their edge sums and counts.  Pairs with no
    cross edges are never merged directly (connectivity guarantees the
    agglomeration completes).  Cubic; a baseline, not a fitter.
    """
    w = ensure_weights(g, w)
    n = g.vertex_count
    if n == 1:
        return Dendrogram(
            num_leaves=1,
            parent=np.array([-1], dtype=np.int64),
            children=np.empty((0, 2), dtype=np.int64),
            altitudes=np.empty(0),
            sizes=np.ones(1, dtype=np.int64),
        )
    # (sum, count) of cross edges per active cluster pair, keyed by node ids
    cross: dict[tuple[int, int], list[float]] = {}
    for e in range(g.edge_count):
        key = (int(g.edges[e, 0]), int(g.edges[e, 1]))
        rec = cross.setdefault(key, [0.0, 0])
        rec[0] += w[e]
        rec[1] += 1
    active = set(range(n))
    children = np.empty((n - 1, 2), dtype=np.int64)
    altitudes = np.empty(n - 1)
    sizes = np.ones(2 * n - 1, dtype=np.int64)
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    for j in range(n - 1):
        (a, b), (ssum, scnt) = min(
            cross.items(), key=lambda kv: (kv[1][0] / kv[1][1], kv[0])
        )
        node = n + j
        children[j] = (a, b)
        altitudes[j] = ssum / scnt
        sizes[node] = sizes[a] + sizes[b]
        parent[a] = parent[b] = node
        active.discard(a)
        active.discard(b)
        del cross[(a, b)]
        for c in list(active):
            pooled = [0.0, 0]
            for old in ((min(a, c), max(a, c)), (min(b, c), max(b, c))):
                if old in cross:
                    rec = cross.pop(old)
                    pooled[0] += rec[0]
                    pooled[1] += rec[1]
            if pooled[1]:
                cross[(c, node)] = pooled
        active.add(node)
    return Dendrogram(
        num_leaves=n,
        parent=parent,
        children=children,
        altitudes=altitudes,
        sizes=sizes,
    )


# ---------------------------------------------------------------------------
# finite differences


def finite_difference_grad(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function, one probe pair per
    coordinate."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (f(xp) - f(xm)) / (2 * h)
    return out
