"""Hot loops with optional numba acceleration.

Every kernel here is plain array code that numba can compile; when numba is
not installed the pure-Python definitions run as-is (correct, just slower).
Results are identical either way.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def merge_forest(order, edge_x, edge_y, n_vertices):
    """Kruskal merge loop: process edges in ``order`` and record each union.

    Returns ``(children, canonical, merges)`` where row j of ``children``
    holds the two tree nodes merged by the j-th union, ``canonical[j]`` is the
    edge id that caused it, and ``merges`` is the number of unions performed
    (``n_vertices - 1`` iff the graph is connected).  Tree node ids: vertices
    are 0..N-1, the j-th union creates node N+j.
    """
    parent = np.arange(n_vertices, dtype=np.int64)
    size = np.ones(n_vertices, dtype=np.int64)
    node_of = np.arange(n_vertices, dtype=np.int64)
    children = np.empty((n_vertices - 1, 2), dtype=np.int64)
    canonical = np.empty(n_vertices - 1, dtype=np.int64)
    nxt = n_vertices
    cnt = 0
    for i in range(order.shape[0]):
        e = order[i]
        x = edge_x[e]
        y = edge_y[e]
        rx = x
        while parent[rx] != rx:
            rx = parent[rx]
        w = x
        while parent[w] != rx:
            t = parent[w]
            parent[w] = rx
            w = t
        ry = y
        while parent[ry] != ry:
            ry = parent[ry]
        w = y
        while parent[w] != ry:
            t = parent[w]
            parent[w] = ry
            w = t
        if rx == ry:
            continue
        if size[rx] < size[ry]:
            rx, ry = ry, rx
        parent[ry] = rx
        size[rx] += size[ry]
        children[cnt, 0] = node_of[rx]
        children[cnt, 1] = node_of[ry]
        canonical[cnt] = e
        node_of[rx] = nxt
        nxt += 1
        cnt += 1
        if cnt == n_vertices - 1:
            break
    return children, canonical, cnt


@njit(cache=True)
def euler_tour(children, n_leaves):
    """Depth-first Euler tour of a binary merge tree rooted at the last node.

    Returns ``(euler, depth, first)``: the node sequence of length
    ``2 * (2N - 1) - 1``, the depth of each tour position, and the first tour
    position of each node.
    """
    n_nodes = 2 * n_leaves - 1
    root = n_nodes - 1
    length = 2 * n_nodes - 1
    euler = np.empty(length, dtype=np.int64)
    depth = np.empty(length, dtype=np.int32)
    first = np.full(n_nodes, -1, dtype=np.int64)
    stack_node = np.empty(n_nodes, dtype=np.int64)
    stack_child = np.zeros(n_nodes, dtype=np.int8)
    top = 0
    stack_node[0] = root
    pos = 0
    euler[0] = root
    depth[0] = 0
    first[root] = 0
    pos = 1
    while top >= 0:
        node = stack_node[top]
        ci = stack_child[top]
        if node >= n_leaves and ci < 2:
            stack_child[top] = ci + 1
            c = children[node - n_leaves, ci]
            if first[c] == -1:
                first[c] = pos
            euler[pos] = c
            depth[pos] = top + 1
            pos += 1
            top += 1
            stack_node[top] = c
            stack_child[top] = 0
        else:
            top -= 1
            if top >= 0:
                euler[pos] = stack_node[top]
                depth[pos] = top
                pos += 1
    return euler, depth, first


@njit(cache=True)
def _sigmoid(t):
    # overflow-safe logistic
    if t >= 0.0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


@njit(cache=True)
def soft_cardinal_values(parent, child_sum, sizes, ref_leaves, alt, n_leaves, tau):
    """Soft cardinal of every internal node, O(total ancestor-chain length)
    time and O(N) memory.

    For internal node j with canonical-edge leaves x, walks the strict
    ancestors y of each x, adding (size of y's child away from x) times
    sigmoid((alt[j] - alt[y]) / tau); the result averages the two walks and
    adds sigmoid(alt[j] / tau) for the leaves themselves.  Both leaves lie
    inside j, so above j their chains coincide (same far child everywhere);
    that shared suffix is walked once and counted for both.  Chains are
    walked rather than materialized because skewed merge trees make their
    total length quadratic.
    """
    n_internal = n_leaves - 1
    card = np.empty(n_internal, dtype=np.float64)
    for j in range(n_internal):
        a_n = alt[j]
        node_j = n_leaves + j
        half = 0.0  # per-extremity terms, carrying the 1/2 factor
        for s in range(2):
            cur = ref_leaves[j, s]
            p = parent[cur]
            while True:
                jp = p - n_leaves
                sib = sizes[child_sum[jp] - cur]
                half += sib * _sigmoid((a_n - alt[jp]) / tau)
                if p == node_j:
                    break
                cur = p
                p = parent[cur]
        shared = 0.0  # ancestors strictly above j, identical for both leaves
        cur = node_j
        p = parent[cur]
        while p != -1:
            jp = p - n_leaves
            sib = sizes[child_sum[jp] - cur]
            shared += sib * _sigmoid((a_n - alt[jp]) / tau)
            cur = p
            p = parent[cur]
        card[j] = _sigmoid(a_n / tau) + 0.5 * half + shared
    return card


@njit(cache=True)
def dasgupta_value_grad(
    parent, child_sum, sizes, ref_leaves, alt, coef, n_leaves, tau
):
    """Fused sum_j coef[j] * soft_cardinal(j) and its altitude gradient.

    One chain walk per node serves both the value and the gradient: each
    sigmoid((alt[j] - alt[y]) / tau) term adds its weighted derivative
    s(1-s)/tau to grad[j] and subtracts it from grad[y].  Same chain
    structure as :func:`soft_cardinal_values`.
    """
    n_internal = n_leaves - 1
    grad = np.zeros(n_internal, dtype=np.float64)
    value = 0.0
    for j in range(n_internal):
        c = coef[j]
        a_n = alt[j]
        node_j = n_leaves + j
        sj = _sigmoid(a_n / tau)
        card_j = sj
        grad[j] += c * sj * (1.0 - sj) / tau
        for s in range(2):
            cur = ref_leaves[j, s]
            p = parent[cur]
            while True:
                jp = p - n_leaves
                sib = sizes[child_sum[jp] - cur]
                sv = _sigmoid((a_n - alt[jp]) / tau)
                card_j += 0.5 * sib * sv
                r = c * 0.5 * sib * sv * (1.0 - sv) / tau
                grad[j] += r
                grad[jp] -= r
                if p == node_j:
                    break
                cur = p
                p = parent[cur]
        cur = node_j
        p = parent[cur]
        while p != -1:
            jp = p - n_leaves
            sib = sizes[child_sum[jp] - cur]
            sv = _sigmoid((a_n - alt[jp]) / tau)
            card_j += sib * sv
            r = c * sib * sv * (1.0 - sv) / tau
            grad[j] += r
            grad[jp] -= r
            cur = p
            p = parent[cur]
        value += c * card_j
    return value, grad
