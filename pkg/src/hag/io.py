"""File formats: TSV tables for graphs and trees, JSON for params and reports.

All tables are tab-separated with a header row.

* ``edges.tsv`` — columns ``u v weight kind``; one row per simple edge with
  integer multiplicity ``weight`` and ``kind`` A (agreement) or C
  (conflict); agreement rows first, each kind sorted by (u, v).
* ``attributes.tsv`` — columns ``leaf_id mark wild color``; one row per
  vertex, ``wild`` is 0/1.  The ``color`` column is an extension over the
  minimal (leaf_id, mark, wild) layout: label counts cannot be re-measured
  without it.  Readers accept files without it (colors default to 0, which
  collapses label diagnostics to a single label).
* ``tree.tsv`` — optional latent-tree dump, columns
  ``node_id depth parent_id color`` with global breadth-first node ids and
  parent −1 at the root.

Writers are deterministic: identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd

from .edges import LabelledMultigraph, Subgraph
from .errors import InputError
from .fitting import FitCurve, TargetStats, constrained_mle
from .params import HagParams
from .tree import ColorAssignment, LatentTree

EDGE_COLUMNS = ("u", "v", "weight", "kind")
ATTR_COLUMNS = ("leaf_id", "mark", "wild", "color")
TREE_COLUMNS = ("node_id", "depth", "parent_id", "color")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def write_json(path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object, got {type(obj).__name__}")
    return obj


def read_params_json(path) -> HagParams:
    """Load generator parameters from a params JSON or a fit/report JSON."""
    d = read_json(path)
    if "params" in d and isinstance(d["params"], dict):
        d = d["params"]
    try:
        return HagParams.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: bad parameter file: {exc}") from exc


def read_targets_json(path) -> TargetStats:
    """Load target statistics.

    ``degree_variance`` may be given directly, or replaced by a
    ``degree_file`` key naming a whitespace-separated file of raw agreement
    degrees (resolved relative to the JSON file); the variance proxy is then
    estimated from the positive degrees by the constrained profile
    likelihood.
    """
    d = read_json(path)
    if "degree_variance" not in d and "degree_file" in d:
        degree_path = Path(path).parent / str(d.pop("degree_file"))
        try:
            degrees = np.loadtxt(degree_path, dtype=float).ravel()
        except (OSError, ValueError) as exc:
            raise InputError(f"{degree_path}: cannot read degree sample: {exc}") from exc
        positive = degrees[degrees > 0]
        if positive.size < 2:
            raise InputError(f"{degree_path}: need at least two positive degrees")
        d["degree_variance"] = constrained_mle(np.log(positive)).eta2
    try:
        return TargetStats.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: bad target statistics: {exc}") from exc


# ---------------------------------------------------------------------------
# TSV tables
# ---------------------------------------------------------------------------


def _read_table(path, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, sep="\t", dtype=None)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: cannot parse TSV: {exc}") from exc
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise InputError(f"{path}: missing columns {missing}; found {list(frame.columns)}")
    return frame


def write_edges_tsv(path, graph: LabelledMultigraph) -> None:
    parts = []
    for kind, sub in (("A", graph.agreement), ("C", graph.conflict)):
        parts.append(
            pd.DataFrame(
                {"u": sub.u, "v": sub.v, "weight": sub.w, "kind": kind}
            )
        )
    table = pd.concat(parts, ignore_index=True)
    table.to_csv(path, sep="\t", index=False)


def write_attributes_tsv(path, graph: LabelledMultigraph, marks: np.ndarray) -> None:
    pd.DataFrame(
        {
            "leaf_id": np.arange(graph.n_vertices, dtype=np.int64),
            "mark": np.asarray(marks, dtype=np.float64),
            "wild": graph.wild.astype(np.int64),
            "color": graph.colors.astype(np.int64),
        }
    ).to_csv(path, sep="\t", index=False)


def write_tree_tsv(path, tree: LatentTree, colors: ColorAssignment) -> None:
    offsets = tree.level_offsets
    ids = []
    depths = []
    parents = []
    cols = []
    for d in range(tree.depth + 1):
        size = tree.level_sizes[d]
        ids.append(offsets[d] + np.arange(size, dtype=np.int64))
        depths.append(np.full(size, d, dtype=np.int64))
        if d == 0:
            parents.append(np.array([-1], dtype=np.int64))
        else:
            parents.append(offsets[d - 1] + tree.parent[d])
        cols.append(colors.colors[d].astype(np.int64))
    pd.DataFrame(
        {
            "node_id": np.concatenate(ids),
            "depth": np.concatenate(depths),
            "parent_id": np.concatenate(parents),
            "color": np.concatenate(cols),
        }
    ).to_csv(path, sep="\t", index=False)


def read_attributes_tsv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read (marks, wild, colors) indexed by leaf id 0..n-1."""
    frame = _read_table(path, ("leaf_id", "mark", "wild"))
    try:
        leaf = frame["leaf_id"].to_numpy(dtype=np.int64)
        marks = frame["mark"].to_numpy(dtype=np.float64)
        wild = frame["wild"].to_numpy(dtype=np.int64)
        colors = (
            frame["color"].to_numpy(dtype=np.int64)
            if "color" in frame.columns
            else np.zeros(len(frame), dtype=np.int64)
        )
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: non-numeric attribute values: {exc}") from exc
    n = len(leaf)
    if n == 0:
        raise InputError(f"{path}: no attribute rows")
    if not np.array_equal(np.sort(leaf), np.arange(n)):
        raise InputError(f"{path}: leaf_id must cover 0..{n - 1} exactly once")
    if not np.isin(wild, (0, 1)).all():
        raise InputError(f"{path}: wild must be 0 or 1")
    order = np.argsort(leaf)
    return marks[order], wild[order], colors[order]


def _subgraph_from_rows(u: np.ndarray, v: np.ndarray, w: np.ndarray, n: int) -> Subgraph:
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    keys = lo * np.int64(n) + hi
    uniq, inverse = np.unique(keys, return_inverse=True)
    weights = np.bincount(inverse, weights=w.astype(np.float64)).astype(np.int64)
    return Subgraph(n, uniq // n, uniq % n, weights)


def read_graph(edge_path, attr_path) -> LabelledMultigraph:
    """Rebuild a labelled multigraph from its two TSV files."""
    marks, wild, colors = read_attributes_tsv(attr_path)
    n = len(marks)
    frame = _read_table(edge_path, EDGE_COLUMNS)
    try:
        u = frame["u"].to_numpy(dtype=np.int64)
        v = frame["v"].to_numpy(dtype=np.int64)
        w = frame["weight"].to_numpy(dtype=np.int64)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{edge_path}: non-integer edge values: {exc}") from exc
    kind = frame["kind"].to_numpy(dtype=object)
    bad = ~np.isin(kind, ("A", "C"))
    if bad.any():
        raise InputError(
            f"{edge_path}: kind must be 'A' or 'C', found {sorted(set(kind[bad]))}"
        )
    if len(u) and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
        raise InputError(f"{edge_path}: endpoint ids must lie in [0, {n})")
    if (u == v).any():
        raise InputError(f"{edge_path}: self-loops are not valid edges")
    if len(w) and w.min() < 1:
        raise InputError(f"{edge_path}: weights must be positive integers")
    is_a = kind == "A"
    graph = LabelledMultigraph(
        n_vertices=n,
        colors=colors,
        wild=wild.astype(bool),
        agreement=_subgraph_from_rows(u[is_a], v[is_a], w[is_a], n),
        conflict=_subgraph_from_rows(u[~is_a], v[~is_a], w[~is_a], n),
    )
    return graph


# ---------------------------------------------------------------------------
# CSV extras
# ---------------------------------------------------------------------------


def write_fit_curve_csv(path, curve: FitCurve) -> None:
    curve.to_frame().to_csv(path, index=False)


def write_label_frequencies_csv(path, labels: np.ndarray, counts: np.ndarray) -> None:
    pd.DataFrame({"label": labels, "count": counts}).to_csv(path, index=False)


def write_component_sizes_csv(path, sizes: np.ndarray) -> None:
    pd.DataFrame(
        {"rank": np.arange(1, len(sizes) + 1, dtype=np.int64), "size": sizes}
    ).to_csv(path, index=False)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
