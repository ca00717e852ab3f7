#!/usr/bin/env python3
"""Per-iteration wall time of the descent across graph sizes and costs.

Times the marginal cost of one iteration (difference between 5-iteration
and 1-iteration runs) so fixed setup — initial projection, allocation,
compilation — is excluded.  The first run warms the compiled kernels.

Example:
    python3 scripts/scaling_benchmark.py --edges 1e4 1e5 1e6 --costs closest dasgupta
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from ultrafit.costs import Closest, ClusterSize, CostSpec, Dasgupta
from ultrafit.datasets import random_connected_graph
from ultrafit.fitting import FitConfig, fit


def make_spec(name: str, w: np.ndarray) -> CostSpec:
    terms = {
        "closest": [(Closest(), 1.0)],
        "closest+size": [(Closest(), 1.0), (ClusterSize(10), 10.0)],
        "dasgupta": [(Dasgupta(1.0), 1.0)],
    }[name]
    return CostSpec(terms=terms, reference_weights=w)


def per_iteration_seconds(g, w, spec) -> float:
    def timed(iterations: int) -> float:
        cfg = FitConfig(
            cost=spec, iterations=iterations, step_size=0.1, record_trace=False
        )
        t0 = time.perf_counter()
        fit(g, w, cfg)
        return time.perf_counter() - t0

    timed(1)  # warm compiled kernels and allocation paths at this size
    return (timed(5) - timed(1)) / 4.0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--edges", nargs="+", type=float, default=[1e4, 1e5, 1e6],
        help="edge counts to benchmark",
    )
    ap.add_argument(
        "--costs", nargs="+", default=["closest", "closest+size", "dasgupta"],
        choices=["closest", "closest+size", "dasgupta"],
    )
    ap.add_argument(
        "--density", type=float, default=10.0, help="edges per vertex"
    )
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print(f"{'edges':>10s} {'vertices':>10s} " + "".join(f"{c:>16s}" for c in args.costs))
    for m_f in args.edges:
        m = int(m_f)
        n = max(int(m / args.density), 3)
        g, w = random_connected_graph(n, m, seed=args.seed)
        row = f"{g.edge_count:>10d} {g.vertex_count:>10d} "
        for cost in args.costs:
            seconds = per_iteration_seconds(g, w, make_spec(cost, w))
            row += f"{seconds:>14.3f} s"
        print(row)


if __name__ == "__main__":
    main()
