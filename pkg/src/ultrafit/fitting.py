"""Gradient-descent loop for ultrametric fitting.

Each iteration projects the working weights onto the subdominant ultrametric
(fresh tree build — no structure is reused across iterations), evaluates the
composite cost and its sub-gradient, pulls the gradient back through the
projection, and applies an AMSGrad step.  The working weights are
unconstrained during descent; the returned ultrametric is the projection of
the final weights with negative values clamped to zero (an entrywise
non-decreasing map, so the clamped vector stays ultrametric), and the number
of clamped edges is reported as a diagnostic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import CostSpec, cost_composite
from .errors import NonFiniteCostError, ValidationError
from .graph import Graph, ensure_weights
from .hierarchy import Dendrogram
from .subdominant import subdominant, subdominant_vjp


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameters of one fitting run.

    ``step_size`` 0.1 suits small illustrative problems; 0.01 is a steadier
    choice for larger validation runs.  ``convergence_tol`` stops early when
    the relative cost change drops below it; the default 0 always runs the
    full iteration budget.  ``optimizer`` is "amsgrad" or plain "sgd" (kept
    for debugging).
    """

    cost: CostSpec
    iterations: int = 150
    step_size: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    convergence_tol: float = 0.0
    record_trace: bool = True
    optimizer: str = "amsgrad"

    def __post_init__(self):
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ValidationError(f"step_size must be > 0, got {self.step_size}")
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        for name, b in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0 <= b < 1:
                raise ValidationError(f"{name} must be in [0, 1), got {b}")
        if self.convergence_tol < 0:
            raise ValidationError("convergence_tol must be >= 0")
        if self.optimizer not in ("amsgrad", "sgd"):
            raise ValidationError(f"optimizer must be 'amsgrad' or 'sgd', got {self.optimizer!r}")


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit`.

    ``trace[0]`` is the cost at the initial weights, so its length is
    ``iterations_run + 1`` (just the final cost when trace recording is
    off).  ``clamped_edges`` counts entries of the final ultrametric lifted
    from negative values to 0.
    """

    u_final: np.ndarray        # (M,) nonnegative ultrametric values
    w_tilde_final: np.ndarray  # (M,) unconstrained weights at the last step
    tree: Dendrogram           # single-linkage dendrogram of u_final
    trace: np.ndarray          # (iterations_run + 1,) cost values
    iterations_run: int
    clamped_edges: int


def fit(g: Graph, w, cfg: FitConfig) -> FitResult:
    """Fit an ultrametric to ``(g, w)`` by descending the configured cost.

    The working vector starts at ``w``.  Deterministic: identical inputs and
    config give bit-identical traces.  A non-finite cost raises
    :class:`NonFiniteCostError` carrying the iteration index.
    """
    w = ensure_weights(g, w, nonnegative=True)
    wt = w.copy()
    m_avg = np.zeros_like(wt)
    v_avg = np.zeros_like(wt)
    v_hat = np.zeros_like(wt)
    trace = []

    res = subdominant(g, wt)
    value, grad_u = cost_composite(cfg.cost, res)
    if not math.isfinite(value):
        raise NonFiniteCostError("initial cost is not finite", iteration=0)
    trace.append(value)

    it = 0
    for it in range(1, cfg.iterations + 1):
        grad = subdominant_vjp(res, grad_u)
        if cfg.optimizer == "sgd":
            wt = wt - cfg.step_size * grad
        else:
            m_avg = cfg.beta1 * m_avg + (1 - cfg.beta1) * grad
            v_avg = cfg.beta2 * v_avg + (1 - cfg.beta2) * grad * grad
            np.maximum(v_hat, v_avg, out=v_hat)
            # bias-corrected step; the max-corrected second moment keeps the
            # effective step size monotone non-increasing per coordinate
            m_hat = m_avg / (1 - cfg.beta1**it)
            v_corr = v_hat / (1 - cfg.beta2**it)
            wt = wt - cfg.step_size * m_hat / (np.sqrt(v_corr) + cfg.eps)

        res = subdominant(g, wt)
        value, grad_u = cost_composite(cfg.cost, res)
        if not math.isfinite(value):
            raise NonFiniteCostError(
                f"cost became non-finite at iteration {it}", iteration=it
            )
        trace.append(value)
        if cfg.convergence_tol > 0:
            prev, cur = trace[-2], trace[-1]
            if abs(cur - prev) <= cfg.convergence_tol * max(abs(prev), 1e-300):
                break

    u = res.u
    clamped = int((u < 0).sum())
    if clamped:
        u = np.maximum(u, 0.0)
    final = subdominant(g, u)
    trace_arr = np.asarray(trace if cfg.record_trace else trace[-1:], dtype=np.float64)
    return FitResult(
        u_final=final.u,
        w_tilde_final=wt,
        tree=final.tree,
        trace=trace_arr,
        iterations_run=it,
        clamped_edges=clamped,
    )


def normalize_trace(trace) -> np.ndarray:
    """Affine rescale of a cost trace to [0, 1]; constant traces map to zeros."""
    t = np.asarray(trace, dtype=np.float64)
    if t.size == 0:
        raise ValidationError("trace is empty")
    lo, hi = t.min(), t.max()
    if hi == lo:
        return np.zeros_like(t)
    return (t - lo) / (hi - lo)
