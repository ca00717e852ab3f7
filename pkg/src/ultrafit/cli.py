"""Command-line front end.

Subcommands:

- ``graph-build``: points CSV -> edge-list file (k-NN plus MST edges).
- ``fit``: edge list -> fitted ultrametric edge list, linkage matrix, and
  cost-trace CSV (optionally an SVG chart).  Accepts several inputs for
  batch runs; ``--jobs`` parallelizes batch fits over processes.
- ``cluster``: linkage matrix + ``--k`` -> flat labels.
- ``eval``: predicted vs reference labels -> accuracy under the best
  cluster-to-class assignment.
- ``check``: edge list -> ultrametricity verdict.

Exit codes: 0 success, 2 validation or parse failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io as uio
from .costs import Closest, ClusterSize, CostSpec, Dasgupta, Triplet
from .errors import (
    NumericalError,
    ParseError,
    TooLargeError,
    ValidationError,
)
from .fitting import FitConfig, fit
from .graph import is_ultrametric
from .hierarchy import cut_to_k_clusters
from .preprocessing import knn_mst_graph, sample_triplets

COSTS = ("closest", "closest+size", "closest+triplet", "dasgupta", "dasgupta+size")
# default weight of the second term when --lambda is not given
DEFAULT_LAMBDA = {"closest+size": 10.0, "closest+triplet": 1.0, "dasgupta+size": 1.0}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ultrafit",
        description="Fit ultrametric distances to sparse edge-weighted graphs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gb = sub.add_parser("graph-build", help="points CSV -> k-NN + MST edge list")
    gb.add_argument("--input", required=True, help="points CSV, one point per row")
    gb.add_argument("--output", required=True, help="edge-list file to write")
    gb.add_argument("--knn", type=int, default=5, help="neighbors per point (default 5)")
    gb.add_argument(
        "--with-labels", action="store_true",
        help="treat the last CSV column as an integer class label",
    )
    gb.add_argument(
        "--labels-output", default=None,
        help="write 'vertex label' lines for labeled points (needs --with-labels)",
    )

    ft = sub.add_parser("fit", help="edge list -> fitted ultrametric")
    ft.add_argument("--input", required=True, nargs="+", help="edge-list file(s)")
    ft.add_argument("--output", default=None, help="fitted edge list (single input)")
    ft.add_argument("--linkage-output", default=None, help="linkage matrix file")
    ft.add_argument("--trace-output", default=None, help="cost trace CSV")
    ft.add_argument("--svg-output", default=None, help="cost trace SVG chart")
    ft.add_argument("--cost", choices=COSTS, default="closest")
    ft.add_argument(
        "--lambda", dest="lam", type=float, default=None,
        help="weight of the second cost term (default 10 for closest+size, else 1)",
    )
    ft.add_argument("--alpha", type=float, default=10.0, help="triplet margin")
    ft.add_argument("--top-k", type=int, default=10, help="size-term rank cutoff")
    ft.add_argument("--tau", type=float, default=1.0, help="soft-cardinal temperature")
    ft.add_argument("--iterations", type=int, default=150)
    ft.add_argument("--step-size", type=float, default=0.1)
    ft.add_argument("--seed", type=int, default=0)
    ft.add_argument("--triplets", default=None, help="file of 'ref pos neg' lines")
    ft.add_argument("--labels", default=None, help="labels file to sample triplets from")
    ft.add_argument("--triplet-count", type=int, default=200)
    ft.add_argument("--jobs", type=int, default=1, help="parallel fits in batch mode")

    cl = sub.add_parser("cluster", help="linkage matrix -> flat labels")
    cl.add_argument("--input", required=True, help="linkage matrix file")
    cl.add_argument("--output", required=True, help="labels file to write")
    cl.add_argument("--k", type=int, required=True, help="number of clusters")

    ev = sub.add_parser("eval", help="accuracy of predicted vs reference labels")
    ev.add_argument("--pred", required=True, help="predicted labels file")
    ev.add_argument("--true", dest="ref", required=True, help="reference labels file")

    ck = sub.add_parser("check", help="report whether an edge list is ultrametric")
    ck.add_argument("--input", required=True, help="edge-list file")
    ck.add_argument("--tol", type=float, default=1e-9)
    return ap


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_graph_build(args) -> int:
    pts = uio.read_points_csv(args.input, with_labels=args.with_labels)
    g, w = knn_mst_graph(pts, args.knn)
    uio.write_edge_list(args.output, g, w)
    if args.labels_output:
        if pts.labels is None:
            raise ValidationError("--labels-output requires --with-labels")
        uio.write_labels(args.labels_output, pts.labels)
    print(f"wrote {args.output}: {g.vertex_count} vertices, {g.edge_count} edges")
    return 0


def _make_cost(args, g, w) -> CostSpec:
    lam = args.lam if args.lam is not None else DEFAULT_LAMBDA.get(args.cost, 1.0)
    if args.cost == "closest":
        terms = [(Closest(), 1.0)]
    elif args.cost == "closest+size":
        terms = [(Closest(), 1.0), (ClusterSize(args.top_k), lam)]
    elif args.cost == "closest+triplet":
        if args.triplets:
            ts = uio.read_triplets(args.triplets)
        elif args.labels:
            labels = uio.read_labels(args.labels, g.vertex_count)
            ts = sample_triplets(labels, args.triplet_count, seed=args.seed)
        else:
            raise ValidationError("closest+triplet needs --triplets or --labels")
        terms = [(Closest(), 1.0), (Triplet(ts, args.alpha), lam)]
    elif args.cost == "dasgupta":
        terms = [(Dasgupta(args.tau), 1.0)]
    else:  # dasgupta+size
        terms = [(Dasgupta(args.tau), 1.0), (ClusterSize(args.top_k), lam)]
    return CostSpec(terms=terms, reference_weights=w)


def _fit_paths(inp: str, args) -> tuple[str, str | None, str | None, str | None]:
    if len(args.input) == 1:
        out = args.output or str(Path(inp).with_suffix("")) + ".fitted.txt"
        return out, args.linkage_output, args.trace_output, args.svg_output
    stem = str(Path(inp).with_suffix(""))
    return (
        f"{stem}.fitted.txt",
        f"{stem}.linkage.txt",
        f"{stem}.trace.csv",
        None,
    )


def _fit_one(inp: str, args) -> str:
    g, w = uio.read_edge_list(inp)
    spec = _make_cost(args, g, w)
    cfg = FitConfig(
        cost=spec,
        iterations=args.iterations,
        step_size=args.step_size,
        seed=args.seed,
    )
    result = fit(g, w, cfg)
    out, linkage_out, trace_out, svg_out = _fit_paths(inp, args)
    uio.write_edge_list(out, g, result.u_final)
    if linkage_out:
        uio.write_linkage(linkage_out, result.tree)
    if trace_out:
        uio.write_trace_csv(trace_out, result.trace)
    if svg_out:
        Path(svg_out).write_text(uio.trace_svg(result.trace))
    return (
        f"{inp}: cost {result.trace[0]:.6g} -> {result.trace[-1]:.6g} in "
        f"{result.iterations_run} iterations"
        + (f", {result.clamped_edges} edges clamped to 0" if result.clamped_edges else "")
        + f"; wrote {out}"
    )


def _cmd_fit(args) -> int:
    if len(args.input) > 1 and args.output:
        raise ValidationError("--output only applies to a single input; "
                              "batch outputs derive from input names")
    if args.jobs > 1 and len(args.input) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for line in pool.map(_fit_one, args.input, [args] * len(args.input)):
                print(line)
    else:
        for inp in args.input:
            print(_fit_one(inp, args))
    return 0


def _cmd_cluster(args) -> int:
    t = uio.read_linkage(args.input)
    labels = cut_to_k_clusters(t, args.k)
    uio.write_labels(args.output, labels)
    print(f"wrote {args.output}: {args.k} clusters over {t.num_leaves} vertices")
    return 0


def accuracy_best_match(pred: np.ndarray, ref: np.ndarray) -> float:
    """Fraction correct under the best one-to-one cluster/class assignment.

    Computed over positions labeled (>= 0) in both arrays; cluster and class
    ids are arbitrary, so the confusion matrix is matched by the Hungarian
    method (guarded at 20 distinct ids per side).
    """
    from scipy.optimize import linear_sum_assignment

    both = (pred >= 0) & (ref >= 0)
    if not both.any():
        raise ValidationError("no vertex is labeled in both files")
    p = pred[both]
    r = ref[both]
    pu, pi = np.unique(p, return_inverse=True)
    ru, ri = np.unique(r, return_inverse=True)
    if len(pu) > 20 or len(ru) > 20:
        raise TooLargeError(
            f"assignment matching guarded at 20 classes, got {len(pu)} vs {len(ru)}"
        )
    conf = np.zeros((len(pu), len(ru)), dtype=np.int64)
    np.add.at(conf, (pi, ri), 1)
    rows, cols = linear_sum_assignment(conf, maximize=True)
    return float(conf[rows, cols].sum()) / len(p)


def _cmd_eval(args) -> int:
    raw_pred = uio.read_labels(args.pred, _infer_n(args.pred, args.ref))
    raw_ref = uio.read_labels(args.ref, len(raw_pred))
    acc = accuracy_best_match(raw_pred, raw_ref)
    print(f"accuracy {acc:.6f}")
    return 0


def _infer_n(*paths) -> int:
    n = 0
    for path in paths:
        for ln in Path(path).read_text().splitlines():
            if ln.strip():
                try:
                    n = max(n, int(ln.split()[0]) + 1)
                except ValueError:
                    raise ParseError(f"{path}: malformed vertex id in {ln!r}") from None
    if n == 0:
        raise ParseError("label files are empty")
    return n


def _cmd_check(args) -> int:
    g, w = uio.read_edge_list(args.input)
    if (w < 0).any():
        raise ValidationError("edge weights must be nonnegative for the check")
    if is_ultrametric(g, w, tol=args.tol):
        print("ultrametric")
    else:
        from .subdominant import subdominant

        dev = float(np.abs(w - subdominant(g, w).u).max())
        print(f"not ultrametric (max deviation {dev:.6g})")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "graph-build": _cmd_graph_build,
        "fit": _cmd_fit,
        "cluster": _cmd_cluster,
        "eval": _cmd_eval,
        "check": _cmd_check,
    }[args.command]
    try:
        return handler(args)
    except (ParseError, ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
