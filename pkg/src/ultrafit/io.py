"""Text file formats: edge lists, linkage matrices, labels, triplets,
points, cost traces.

Everything is line-oriented plain text for diff-ability.  Floats are
printed with 17 significant digits, which round-trips IEEE doubles exactly,
so parse(serialize(x)) is bit-identical.  Edge ids are line order: the
edge list is the single source of edge indexing for all other files.
"""
from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import Graph, build_graph, ensure_weights
from .hierarchy import Dendrogram, format_linkage_matrix, parse_linkage_matrix
from .preprocessing import PointSet


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# edge lists


def write_edge_list(path, g: Graph, w) -> None:
    """Header ``N M`` then one ``x y w`` line per edge, in edge-id order."""
    w = ensure_weights(g, w)
    with open(path, "w") as f:
        f.write(f"{g.vertex_count} {g.edge_count}\n")
        for i in range(g.edge_count):
            f.write(f"{g.edges[i, 0]} {g.edges[i, 1]} {_fmt(w[i])}\n")


def read_edge_list(path) -> tuple[Graph, np.ndarray]:
    """Parse an edge list; edge ids are assigned in line order."""
    lines = Path(path).read_text().splitlines()
    rows = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError(f"{path}: empty edge list")
    lineno, header = rows[0]
    if len(header) != 2:
        raise ParseError(f"{path}:{lineno}: header must be 'N M'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"{path}:{lineno}: header must be two integers") from None
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"{path}: header promises {m} edges, found {len(body)}")
    pairs = np.empty((m, 2), dtype=np.int64)
    w = np.empty(m, dtype=np.float64)
    for i, (lineno, parts) in enumerate(body):
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'x y w'")
        try:
            pairs[i] = (int(parts[0]), int(parts[1]))
            w[i] = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return build_graph(n, pairs), w


# ---------------------------------------------------------------------------
# linkage matrices


def write_linkage(path, t: Dendrogram) -> None:
    Path(path).write_text(format_linkage_matrix(t))


def read_linkage(path) -> Dendrogram:
    try:
        return parse_linkage_matrix(Path(path).read_text())
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# labels and triplets


def write_labels(path, labels) -> None:
    """One ``vertex label`` line per labeled vertex (label >= 0)."""
    lab = np.asarray(labels, dtype=np.int64)
    with open(path, "w") as f:
        for v in range(len(lab)):
            if lab[v] >= 0:
                f.write(f"{v} {lab[v]}\n")


def read_labels(path, n: int) -> np.ndarray:
    """Labels for ``n`` vertices; vertices absent from the file get -1."""
    out = np.full(n, -1, dtype=np.int64)
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), 1):
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'vertex label'")
        try:
            v, c = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if not 0 <= v < n:
            raise ParseError(f"{path}:{lineno}: vertex {v} out of range [0, {n})")
        if c < 0:
            raise ParseError(f"{path}:{lineno}: label must be >= 0, got {c}")
        out[v] = c
    return out


def write_triplets(path, triples) -> None:
    """One ``ref pos neg`` line per triple."""
    t = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    with open(path, "w") as f:
        for r, p, q in t:
            f.write(f"{r} {p} {q}\n")


def read_triplets(path):
    from .costs import TripletSet

    rows = []
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), 1):
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'ref pos neg'")
        try:
            rows.append([int(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return TripletSet(np.asarray(rows, dtype=np.int64).reshape(-1, 3))


# ---------------------------------------------------------------------------
# points


def read_points_csv(path, with_labels: bool = False) -> PointSet:
    """One point per row, comma-separated coordinates; ``with_labels`` reads
    the trailing column as an integer class label."""
    coords, labels = [], []
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), 1):
        if not ln.strip():
            continue
        parts = [p.strip() for p in ln.split(",")]
        try:
            if with_labels:
                if len(parts) < 2:
                    raise ParseError(
                        f"{path}:{lineno}: need >= 1 coordinate plus a label"
                    )
                coords.append([float(p) for p in parts[:-1]])
                labels.append(int(parts[-1]))
            else:
                coords.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not coords:
        raise ParseError(f"{path}: no points")
    widths = {len(c) for c in coords}
    if len(widths) != 1:
        raise ParseError(f"{path}: inconsistent column counts {sorted(widths)}")
    return PointSet(
        points=np.asarray(coords, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64) if with_labels else None,
    )


def write_points_csv(path, pts: PointSet) -> None:
    with open(path, "w") as f:
        for i in range(len(pts)):
            row = ",".join(_fmt(c) for c in pts.points[i])
            if pts.labels is not None:
                row += f",{pts.labels[i]}"
            f.write(row + "\n")


# ---------------------------------------------------------------------------
# traces


def write_trace_csv(path, trace) -> None:
    """``iteration,cost`` rows, iteration 0 = initial cost."""
    t = np.asarray(trace, dtype=np.float64)
    with open(path, "w") as f:
        f.write("iteration,cost\n")
        for i, v in enumerate(t):
            f.write(f"{i},{_fmt(v)}\n")


def read_trace_csv(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "iteration,cost":
        raise ParseError(f"{path}: missing 'iteration,cost' header")
    out = []
    for lineno, ln in enumerate(lines[1:], 2):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'iteration,cost'")
        try:
            it, v = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if it != len(out):
            raise ParseError(f"{path}:{lineno}: iterations must count from 0")
        out.append(v)
    return np.asarray(out, dtype=np.float64)


def trace_svg(trace, width: int = 640, height: int = 360) -> str:
    """Self-contained SVG line chart of a cost trace (no dependencies)."""
    t = np.asarray(trace, dtype=np.float64)
    pad = 40
    lo, hi = float(t.min()), float(t.max())
    span = (hi - lo) or 1.0
    xs = pad + (width - 2 * pad) * np.arange(len(t)) / max(len(t) - 1, 1)
    ys = height - pad - (height - 2 * pad) * (t - lo) / span
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    buf = _io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
    )
    buf.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    buf.write(
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>\n'
    )
    ax = (
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
    )
    buf.write(ax)
    buf.write(
        f'<text x="{pad}" y="{pad - 10}" font-size="12">cost: '
        f"{_fmt(hi)} (top) to {_fmt(lo)} (bottom), {len(t) - 1} iterations</text>\n"
    )
    buf.write("</svg>\n")
    return buf.getvalue()
