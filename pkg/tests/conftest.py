"""Shared fixtures, hypothesis strategies, and the acceptance report hook.

The acceptance tests in test_acceptance.py attach ``criterion`` / ``detail``
user properties; the terminal-summary hook below turns those into one
pass/fail line per criterion at the end of the run.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ultrafit.datasets import random_connected_graph
from ultrafit.graph import build_graph

settings.register_profile(
    "default",
    deadline=None,  # JIT warm-up makes first examples slow
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


# ---------------------------------------------------------------------------
# reference instances (worked examples used across modules)


@pytest.fixture
def fig_graph():
    """4-vertex, 4-edge graph whose weights (1,3,2,3) are already ultrametric:
    two tight pairs {0,1} and {2,3} joined at level 3."""
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
    w = np.array([1.0, 3.0, 2.0, 3.0])
    return g, w


@pytest.fixture
def triangle():
    """Triangle with weights (1,2,3): the smallest non-ultrametric input."""
    g = build_graph(3, [(0, 1), (1, 2), (0, 2)])
    w = np.array([1.0, 2.0, 3.0])
    return g, w


# ---------------------------------------------------------------------------
# strategies


@st.composite
def connected_graphs(draw, min_vertices=2, max_vertices=8, weights="uniform"):
    """Random connected graph with a weight vector.

    ``weights`` selects "uniform" floats in (0.01, 1.01), "ties" (small
    integers, many equal values), or "negative" (uniform shifted below 0).
    """
    n = draw(st.integers(min_vertices, max_vertices))
    m = draw(st.integers(n - 1, n * (n - 1) // 2))
    seed = draw(st.integers(0, 2**31 - 1))
    g, w = random_connected_graph(n, m, seed=seed)
    if weights == "ties":
        rng = np.random.default_rng(seed ^ 0x5EED)
        w = rng.integers(0, 3, g.edge_count).astype(np.float64)
    elif weights == "negative":
        w = w - 1.0
    return g, w


@st.composite
def point_clouds(draw, min_points=2, max_points=40, max_dim=3):
    n = draw(st.integers(min_points, max_points))
    d = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    return rng.random((n, d))


# ---------------------------------------------------------------------------
# independent oracle for the soft node cardinal


def soft_count_direct(res, tau):
    """Per-internal-node soft vertex count, evaluated the slow direct way.

    For each internal node: average, over the two endpoint leaves x of its
    canonical edge, the sum over *all* vertices z of
    sigmoid((altitude - minmax_distance(x, z)) / tau).  This shares nothing
    with the production ancestor-chain evaluation except the tree itself.
    """
    from scipy.special import expit

    from ultrafit.oracle import minmax_bruteforce

    t = res.tree
    d = minmax_bruteforce(res.graph, res.u)
    ends = res.graph.edges[t.canonical_edge]
    out = np.empty(t.num_leaves - 1)
    for j in range(t.num_leaves - 1):
        a = t.altitudes[j]
        x0, x1 = ends[j]
        out[j] = 0.5 * (
            expit((a - d[x0]) / tau).sum() + expit((a - d[x1]) / tau).sum()
        )
    return out


# ---------------------------------------------------------------------------
# acceptance summary


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for key in ("passed", "failed", "error"):
        reports.extend(terminalreporter.stats.get(key, []))
    acc = [
        r
        for r in reports
        if "test_acceptance.py" in getattr(r, "nodeid", "")
        and (r.when == "call" or (r.when == "setup" and not r.passed))
    ]
    if not acc:
        return
    acc.sort(key=lambda r: r.nodeid)
    terminalreporter.write_sep("=", "acceptance criteria")
    for r in acc:
        props = dict(r.user_properties)
        label = props.get("criterion", r.nodeid.split("::")[-1])
        status = "PASS" if r.passed else "FAIL"
        detail = props.get("detail", "")
        line = f"criterion {label}: {status}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
