"""Case-level outcome/treatment/covariate datasets and their CSV format.

A dataset is a rectangle of cases over a fixed node set: outcomes y in
{-1, +1} per node, a binary treatment (one shared column ``a`` or one
``a_<label>`` column per node), and optional binary covariate columns
``c_<label>``. Files carry a JSON sidecar recording the graph and
treatment mode so a dataset round-trips without outside knowledge.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError, ShapeError
from .graph import NetworkGraph
from .model import PER_NODE, SHARED, TREATMENT_MODES


@dataclass(frozen=True)
class CaseDataset:
    """Outcomes, treatments, and optional covariates for m cases.

    ``y`` has shape (m, n) with entries in {-1, +1}; ``a`` has shape
    (m,) in shared mode and (m, n) in per-node mode, entries in {0, 1};
    ``c`` is None or (m, n) in {0, 1}. ``case_ids`` are unique strings.
    """

    graph: NetworkGraph
    treatment_mode: str
    y: np.ndarray
    a: np.ndarray
    c: np.ndarray | None = None
    case_ids: tuple[str, ...] = ()
    issue_codes: tuple[int, ...] | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.int8)
        a = np.asarray(self.a, dtype=np.int8)
        c = None if self.c is None else np.asarray(self.c, dtype=np.int8)
        m, n = y.shape if y.ndim == 2 else (-1, -1)
        if self.treatment_mode not in TREATMENT_MODES:
            raise ShapeError(f"unknown treatment_mode {self.treatment_mode!r}")
        if y.ndim != 2 or n != self.graph.n:
            raise ShapeError(
                f"y must have shape (m, {self.graph.n}), got {np.shape(self.y)}"
            )
        if not np.all(np.abs(y) == 1):
            raise ShapeError("y entries must be -1 or +1")
        want_a = (m,) if self.treatment_mode == SHARED else (m, n)
        if a.shape != want_a:
            raise ShapeError(f"a must have shape {want_a}, got {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise ShapeError("a entries must be 0 or 1")
        if c is not None:
            if c.shape != (m, n):
                raise ShapeError(f"c must have shape ({m}, {n}), got {c.shape}")
            if not np.all((c == 0) | (c == 1)):
                raise ShapeError("c entries must be 0 or 1")
        ids = tuple(str(s) for s in self.case_ids)
        if not ids:
            ids = tuple(f"case{i:06d}" for i in range(m))
        if len(ids) != m:
            raise ShapeError(f"{len(ids)} case ids for {m} cases")
        if len(set(ids)) != len(ids):
            raise ShapeError("case ids must be unique")
        codes = self.issue_codes
        if codes is not None:
            codes = tuple(int(v) for v in codes)
            if len(codes) != m:
                raise ShapeError(f"{len(codes)} issue codes for {m} cases")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "case_ids", ids)
        object.__setattr__(self, "issue_codes", codes)

    @property
    def n_cases(self) -> int:
        return self.y.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.y.shape[1]

    @property
    def has_covariates(self) -> bool:
        return self.c is not None

    def treatment_matrix(self) -> np.ndarray:
        """Treatments as an (m, n) array regardless of mode."""
        if self.treatment_mode == SHARED:
            return np.repeat(self.a[:, None], self.n_nodes, axis=1)
        return self.a

    def subset(self, rows) -> "CaseDataset":
        """Rows by index; repeats allowed (ids of repeats get #k suffixes)."""
        rows = np.asarray(rows)
        codes = None
        if self.issue_codes is not None:
            codes = tuple(np.asarray(self.issue_codes)[rows])
        picked = [self.case_ids[r] for r in rows]
        seen: dict[str, int] = {}
        ids = []
        for cid in picked:
            k = seen.get(cid, 0)
            seen[cid] = k + 1
            ids.append(cid if k == 0 else f"{cid}#{k}")
        return CaseDataset(
            graph=self.graph,
            treatment_mode=self.treatment_mode,
            y=self.y[rows],
            a=self.a[rows],
            c=None if self.c is None else self.c[rows],
            case_ids=tuple(ids),
            issue_codes=codes,
        )


def dataset_columns(dataset: CaseDataset) -> list[str]:
    labels = dataset.graph.node_labels
    cols = ["case_id"] + [f"y_{lab}" for lab in labels]
    if dataset.treatment_mode == SHARED:
        cols.append("a")
    else:
        cols += [f"a_{lab}" for lab in labels]
    if dataset.c is not None:
        cols += [f"c_{lab}" for lab in labels]
    return cols


def write_dataset_csv(dataset: CaseDataset, path, extra: dict | None = None) -> None:
    """Write the CSV plus a ``<stem>.manifest.json`` sidecar next to it.

    ``extra`` is echoed into the sidecar under ``"config"`` (generation
    seeds and settings travel with the file).
    """
    path = Path(path)
    cols = dataset_columns(dataset)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        a_mat = dataset.a if dataset.treatment_mode == PER_NODE else None
        for r in range(dataset.n_cases):
            row = [dataset.case_ids[r]]
            row += [int(v) for v in dataset.y[r]]
            if a_mat is None:
                row.append(int(dataset.a[r]))
            else:
                row += [int(v) for v in a_mat[r]]
            if dataset.c is not None:
                row += [int(v) for v in dataset.c[r]]
            writer.writerow(row)
    sidecar = {
        "nodes": list(dataset.graph.node_labels),
        "edges": [list(e) for e in dataset.graph.edge_list()],
        "treatment_mode": dataset.treatment_mode,
        "has_covariates": dataset.c is not None,
        "n_cases": dataset.n_cases,
    }
    if dataset.issue_codes is not None:
        sidecar["issue_codes"] = list(dataset.issue_codes)
    if extra:
        sidecar["config"] = extra
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def sidecar_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


def read_dataset_csv(path, graph: NetworkGraph | None = None) -> CaseDataset:
    """Read a dataset CSV, using the sidecar for graph structure.

    Pass ``graph`` explicitly to skip the sidecar (edges default to none
    if neither is available, since the CSV itself only fixes the node
    set).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        rows = list(reader)
    if not header or header[0] != "case_id":
        raise SchemaError("first column must be case_id")
    y_labels = [c[2:] for c in header if c.startswith("y_")]
    if not y_labels:
        raise SchemaError("no y_<label> outcome columns found")
    if "a" in header:
        mode = SHARED
    elif any(c.startswith("a_") for c in header):
        mode = PER_NODE
    else:
        raise SchemaError("no treatment column (a or a_<label>) found")
    has_c = any(c.startswith("c_") for c in header)
    expected = ["case_id"] + [f"y_{lab}" for lab in y_labels]
    if mode == SHARED:
        expected.append("a")
    else:
        expected += [f"a_{lab}" for lab in y_labels]
    if has_c:
        expected += [f"c_{lab}" for lab in y_labels]
    if header != expected:
        raise SchemaError(
            f"column layout {header} does not match expected {expected}"
        )
    issue_codes = None
    if graph is None:
        side = sidecar_path(path)
        if side.exists():
            meta = json.loads(side.read_text())
            graph = NetworkGraph(
                tuple(meta["nodes"]),
                frozenset(tuple(e) for e in meta["edges"]),
            )
            if list(graph.node_labels) != y_labels:
                raise SchemaError("sidecar node labels disagree with CSV header")
            if "issue_codes" in meta:
                issue_codes = tuple(meta["issue_codes"])
        else:
            graph = NetworkGraph(tuple(y_labels), frozenset())
    elif list(graph.node_labels) != y_labels:
        raise SchemaError("supplied graph labels disagree with CSV header")
    n = len(y_labels)
    m = len(rows)
    ids = []
    y = np.empty((m, n), dtype=np.int8)
    a = np.empty((m, n) if mode == PER_NODE else (m,), dtype=np.int8)
    c = np.empty((m, n), dtype=np.int8) if has_c else None
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"row {r + 2} has {len(row)} fields, expected {len(header)}")
        ids.append(row[0])
        try:
            y[r] = [int(v) for v in row[1 : 1 + n]]
            pos = 1 + n
            if mode == SHARED:
                a[r] = int(row[pos])
                pos += 1
            else:
                a[r] = [int(v) for v in row[pos : pos + n]]
                pos += n
            if has_c:
                c[r] = [int(v) for v in row[pos : pos + n]]
        except ValueError as exc:
            raise SchemaError(f"row {r + 2}: non-integer field ({exc})") from None
    return CaseDataset(
        graph=graph,
        treatment_mode=mode,
        y=y,
        a=a,
        c=c,
        case_ids=tuple(ids),
        issue_codes=issue_codes,
    )
