#!/usr/bin/env python3
"""Convergence profile of the closest-ultrametric descent on k-NN graphs.

Draws random uniform point clouds, builds 5-NN (+ MST) graphs, runs the
fit for each, and reports the mean *normalized* cost trace (0 = best cost
reached, 1 = cost at the initial weights).  Optionally writes the mean
trace as CSV and an SVG chart.

Example:
    python3 scripts/convergence_experiment.py --repeats 20 --points 200 \
        --csv mean_trace.csv --svg mean_trace.svg
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from ultrafit.costs import Closest, CostSpec
from ultrafit.fitting import FitConfig, fit, normalize_trace
from ultrafit.io import trace_svg, write_trace_csv
from ultrafit.preprocessing import PointSet, knn_mst_graph


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20, help="number of point clouds")
    ap.add_argument("--points", type=int, default=200, help="points per cloud")
    ap.add_argument("--knn", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=300)
    ap.add_argument("--step-size", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0, help="seed of the first cloud")
    ap.add_argument("--csv", default=None, help="write the mean trace here")
    ap.add_argument("--svg", default=None, help="write an SVG chart here")
    args = ap.parse_args()

    traces = []
    for r in range(args.repeats):
        rng = np.random.default_rng(args.seed + r)
        pts = PointSet(rng.random((args.points, 2)))
        g, w = knn_mst_graph(pts, args.knn)
        spec = CostSpec(terms=[(Closest(), 1.0)], reference_weights=w)
        cfg = FitConfig(
            cost=spec, iterations=args.iterations, step_size=args.step_size
        )
        result = fit(g, w, cfg)
        traces.append(normalize_trace(result.trace))
        print(
            f"cloud {r:2d}: cost {result.trace[0]:.4f} -> {result.trace[-1]:.4f} "
            f"({result.iterations_run} iterations)"
        )

    mean = np.mean(traces, axis=0)
    for it in sorted({10, 50, 100, 150, 200, args.iterations}):
        if it < len(mean):
            print(f"mean normalized cost at iteration {it:4d}: {mean[it]:.5f}")

    if args.csv:
        write_trace_csv(args.csv, mean)
        print(f"wrote {args.csv}")
    if args.svg:
        Path(args.svg).write_text(trace_svg(mean))
        print(f"wrote {args.svg}")


if __name__ == "__main__":
    main()
