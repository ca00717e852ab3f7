"""Differentiable cost terms over projected ultrametrics.

Each term maps a :class:`~ultrafit.subdominant.SubdominantResult` to a scalar
value and a gradient with respect to the ultrametric values ``u``.  All
tree-structural quantities — which node is which LCA, pass edges, hard node
sizes, min-child sizes, ranks — are held constant in every gradient; they
change only when the tree is rebuilt at the next projection.  This gives
well-defined sub-gradients for the piecewise-smooth composite costs.

Terms compose linearly through :class:`CostSpec` / :func:`cost_composite`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._accel import dasgupta_value_grad, soft_cardinal_values
from .errors import (
    LengthMismatchError,
    NonpositiveWeightError,
    ValidationError,
    VertexOutOfRangeError,
)
from .graph import ensure_weights
from .hierarchy import node_attributes
from .lca import lca as lca_query
from .subdominant import SubdominantResult

# ---------------------------------------------------------------------------
# term and spec types


@dataclass(frozen=True)
class Closest:
    """Squared distance to the reference weights: sum of (u - w)^2."""


@dataclass(frozen=True)
class ClusterSize:
    """Sum of u(e) / (size of the smallest child of e's pass node).

    Penalizes high merges of small clusters.  ``top_k`` restricts the sum to
    edges whose pass node ranks among the ``top_k`` highest merges (rank 1 =
    root); ``inf`` keeps every edge.
    """

    top_k: Union[int, float] = 10

    def __post_init__(self):
        if self.top_k != math.inf:
            if not isinstance(self.top_k, (int, np.integer)) or self.top_k < 0:
                raise ValidationError(
                    f"top_k must be a non-negative integer or inf, got {self.top_k!r}"
                )


@dataclass(frozen=True)
class TripletSet:
    """Batch of (ref, pos, neg) vertex triples.

    ref and pos belong to the same class, neg to a different one; only
    ref != neg is structurally required (ref == pos merely pins the positive
    distance at zero).
    """

    triples: np.ndarray  # (T, 3) int64

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.triples, dtype=np.int64))
        t = t.reshape(-1, 3) if t.size else t.reshape(0, 3)
        if (t[:, 0] == t[:, 2]).any():
            i = int(np.flatnonzero(t[:, 0] == t[:, 2])[0])
            raise ValidationError(f"triple {i}: ref == neg == {t[i, 0]}")
        t.setflags(write=False)
        object.__setattr__(self, "triples", t)

    def __len__(self) -> int:
        return len(self.triples)


@dataclass(frozen=True)
class Triplet:
    """Hinge on triple distances: sum of max(0, margin + d(ref,pos) - d(ref,neg))."""

    triplets: TripletSet
    margin: float = 10.0

    def __post_init__(self):
        if not (math.isfinite(self.margin) and self.margin > 0):
            raise ValidationError(f"margin must be positive, got {self.margin}")


@dataclass(frozen=True)
class Dasgupta:
    """Sum over edges of soft-cardinal(pass node) / w(e).

    ``temperature`` scales the sigmoid relaxing the node cardinal; the
    relaxation is scale-sensitive, so normalizing input weights to [0, 1]
    is recommended.
    """

    temperature: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValidationError(
                f"temperature must be positive, got {self.temperature}"
            )


Term = Union[Closest, ClusterSize, Triplet, Dasgupta]


@dataclass(frozen=True)
class CostSpec:
    """Weighted sum of cost terms, with the reference weights they share."""

    terms: tuple  # of (Term, float) pairs
    reference_weights: np.ndarray | None = None  # (M,) float64

    def __post_init__(self):
        terms = tuple((t, float(lam)) for t, lam in self.terms)
        if not terms:
            raise ValidationError("CostSpec needs at least one term")
        for t, lam in terms:
            if not (math.isfinite(lam) and lam >= 0):
                raise ValidationError(f"term weight must be finite and >= 0, got {lam}")
            if not isinstance(t, (Closest, ClusterSize, Triplet, Dasgupta)):
                raise ValidationError(f"unknown cost term {t!r}")
        object.__setattr__(self, "terms", terms)
        if self.reference_weights is not None:
            w = np.ascontiguousarray(self.reference_weights, dtype=np.float64)
            w.setflags(write=False)
            object.__setattr__(self, "reference_weights", w)
        needs_w = any(isinstance(t, (Closest, Dasgupta)) for t, lam in terms if lam > 0)
        if needs_w and self.reference_weights is None:
            raise ValidationError(
                "reference_weights required for closest/dasgupta terms"
            )


# ---------------------------------------------------------------------------
# individual terms


def cost_closest(res: SubdominantResult, w) -> tuple[float, np.ndarray]:
    """Squared deviation from reference weights and its gradient 2(u - w)."""
    w = ensure_weights(res.graph, w)
    r = res.u - w
    return float(r @ r), 2.0 * r


def cost_cluster_size(res: SubdominantResult, top_k=10) -> tuple[float, np.ndarray]:
    """Size-regularizer value and gradient.

    Every edge whose pass node ranks within the ``top_k`` highest merges
    contributes u(e)/gamma(pass node) with gamma (min child size) constant,
    so the gradient is the indicator-weighted reciprocal.
    """
    n = res.tree.num_leaves
    grad = np.zeros_like(res.u)
    if n < 2 or top_k == 0:
        return 0.0, grad
    gamma = node_attributes(res.tree).gamma.astype(np.float64)
    j = res.pass_node - n
    # rank(internal j) = (N-1) - j, so rank <= top_k means j >= N-1-top_k
    if top_k == math.inf or top_k >= n - 1:
        included = slice(None)
        coeff = 1.0 / gamma[j]
    else:
        included = j >= (n - 1) - int(top_k)
        coeff = np.zeros(len(j))
        coeff[included] = 1.0 / gamma[j[included]]
    grad[:] = coeff
    return float(res.u @ coeff), grad


def cost_triplet(
    res: SubdominantResult, triplets: TripletSet, margin: float = 10.0
) -> tuple[float, np.ndarray]:
    """Triple hinge loss and its sub-gradient.

    Per triple, the positive distance d(ref, pos) lives on the pass edge of
    the (ref, pos) LCA and the negative distance on that of (ref, neg); an
    active hinge pushes the former down (+1) and the latter up (-1).  Exactly
    zero hinges contribute no gradient.
    """
    grad = np.zeros_like(res.u)
    t = triplets.triples
    if len(t) == 0:
        return 0.0, grad
    n = res.tree.num_leaves
    if t.min() < 0 or t.max() >= n:
        bad = t[(t < 0) | (t >= n)][0]
        raise VertexOutOfRangeError(f"triplet vertex {bad} out of range [0, {n})")
    ref, pos, neg = t[:, 0], t[:, 1], t[:, 2]
    p_node = lca_query(res.lca, ref, pos)
    q_node = lca_query(res.lca, ref, neg)
    canonical = res.tree.canonical_edge
    q_edge = canonical[q_node - n]
    d_q = res.u[q_edge]
    degenerate = p_node < n  # ref == pos: distance identically zero
    p_edge = canonical[np.where(degenerate, 0, p_node - n)]
    d_p = np.where(degenerate, 0.0, res.u[p_edge])
    h = margin + d_p - d_q
    active = h > 0
    value = float(h[active].sum())
    np.add.at(grad, p_edge[active & ~degenerate], 1.0)
    np.subtract.at(grad, q_edge[active], 1.0)
    return value, grad


@dataclass(frozen=True)
class SoftCardinalSupport:
    """Tree arrays retained for differentiating through the soft cardinal.

    These are references into the originating dendrogram plus the canonical
    edge endpoints; the ancestor chains themselves are re-walked during the
    backward pass (skewed merge trees make their total length quadratic, so
    materializing them is not an option).
    """

    tau: float
    parent: np.ndarray      # (2N-1,) int64
    child_sum: np.ndarray   # (N-1,) int64 sum of the two children ids
    sizes: np.ndarray       # (2N-1,) int64
    ref_leaves: np.ndarray  # (N-1, 2) canonical-edge endpoint leaves
    altitudes: np.ndarray   # (N-1,) float64


def _cardinal_support(res: SubdominantResult, tau: float) -> SoftCardinalSupport:
    t = res.tree
    return SoftCardinalSupport(
        tau=tau,
        parent=np.ascontiguousarray(t.parent),
        child_sum=np.ascontiguousarray(t.children[:, 0] + t.children[:, 1]),
        sizes=np.ascontiguousarray(t.sizes),
        ref_leaves=np.ascontiguousarray(res.graph.edges[t.canonical_edge]),
        altitudes=np.ascontiguousarray(t.altitudes),
    )


def soft_cardinal(
    res: SubdominantResult, tau: float = 1.0
) -> tuple[np.ndarray, SoftCardinalSupport]:
    """Differentiable node-size surrogate for every internal node.

    For internal node n at altitude A, averages over the two endpoint leaves
    x of its canonical edge the soft count of vertices closer to x than A:
    sigmoid(A/tau) for x itself plus, for each strict ancestor y of x, the
    hard size of y's far child weighted by sigmoid((A - altitude(y))/tau).
    As tau -> 0 this recovers the hard cardinal up to ties.  Worst case
    O(N^2) time (skewed trees), O(N log N) when merges are balanced.
    """
    sup = _cardinal_support(res, tau)
    card = soft_cardinal_values(
        sup.parent, sup.child_sum, sup.sizes, sup.ref_leaves,
        sup.altitudes, res.tree.num_leaves, tau,
    )
    return card, sup


def cost_dasgupta(
    res: SubdominantResult, w, tau: float = 1.0
) -> tuple[float, np.ndarray]:
    """Soft-cardinal relaxation of the LCA-size / weight sum, with gradient.

    value = sum over edges of soft_cardinal(pass node of e) / w(e).  The
    gradient flows through the sigmoids only (hard sizes and tree structure
    constant) and lands on canonical edges, one per internal node.
    """
    w = ensure_weights(res.graph, w)
    if (w <= 0).any():
        i = int(np.flatnonzero(w <= 0)[0])
        raise NonpositiveWeightError(
            f"edge {i} has weight {w[i]}; positive weights required to divide"
        )
    t = res.tree
    n = t.num_leaves
    grad = np.zeros_like(res.u)
    if n < 2:
        return 0.0, grad
    sup = _cardinal_support(res, tau)
    coef = np.bincount(res.pass_node - n, weights=1.0 / w, minlength=n - 1)
    value, grad_alt = dasgupta_value_grad(
        sup.parent, sup.child_sum, sup.sizes, sup.ref_leaves,
        sup.altitudes, coef, n, tau,
    )
    grad[t.canonical_edge] = grad_alt
    return float(value), grad


def cost_composite(spec: CostSpec, res: SubdominantResult) -> tuple[float, np.ndarray]:
    """Weighted sum of the CostSpec terms; zero-weight terms are skipped."""
    value = 0.0
    grad = np.zeros_like(res.u)
    for term, lam in spec.terms:
        if lam == 0:
            continue
        if isinstance(term, Closest):
            v, g = cost_closest(res, spec.reference_weights)
        elif isinstance(term, ClusterSize):
            v, g = cost_cluster_size(res, term.top_k)
        elif isinstance(term, Triplet):
            v, g = cost_triplet(res, term.triplets, term.margin)
        else:
            v, g = cost_dasgupta(res, spec.reference_weights, term.temperature)
        value += lam * v
        grad += lam * g
    return value, grad
