"""Core data model: run histories, search spaces, pipelines, datasets.

Everything an optimizer run leaves behind is captured by one JSON document
(the run history) plus one CSV file (the dataset it ran on).  The loader
checks the full contract up front so every later analysis can assume a valid,
immutable object graph.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import LoadError, MergeError, NotFoundError, ValidationError

FORMAT_VERSION = "1.0"

KIND_CONTINUOUS = "numeric-continuous"
KIND_INTEGER = "numeric-integer"
KIND_CATEGORICAL = "categorical"
HP_KINDS = (KIND_CONTINUOUS, KIND_INTEGER, KIND_CATEGORICAL)

# Virtual node id accepted by data-flow inspection: "nothing applied yet".
SOURCE_NODE = "__source__"


# ---------------------------------------------------------------------------
# search spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    """Activation guard: the hyperparameter is active iff parent == value."""

    parent: str
    value: Any


@dataclass(frozen=True)
class Hyperparameter:
    name: str
    kind: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    choices: tuple = ()
    default: Any = None
    log_scale: bool = False
    condition: Optional[Condition] = None

    @property
    def is_numeric(self) -> bool:
        return self.kind in (KIND_CONTINUOUS, KIND_INTEGER)

    def contains(self, value: Any) -> bool:
        """True iff ``value`` lies in this hyperparameter's domain."""
        if self.is_numeric:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            v = float(value)
            if math.isnan(v) or v < self.lower or v > self.upper:
                return False
            if self.kind == KIND_INTEGER and not v.is_integer():
                return False
            return True
        return value in self.choices


@dataclass(frozen=True)
class SearchSpace:
    hyperparameters: tuple[Hyperparameter, ...]
    structure_template: Optional["PipelineGraph"] = None

    def names(self) -> tuple[str, ...]:
        return tuple(hp.name for hp in self.hyperparameters)

    def by_name(self, name: str) -> Hyperparameter:
        for hp in self.hyperparameters:
            if hp.name == name:
                return hp
        raise NotFoundError(f"unknown hyperparameter: {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(hp.name == name for hp in self.hyperparameters)

    def validate(self) -> None:
        seen = set()
        for hp in self.hyperparameters:
            if hp.name in seen:
                raise ValidationError(f"duplicate hyperparameter name: {hp.name!r}")
            seen.add(hp.name)
            _validate_hyperparameter(hp)
        for hp in self.hyperparameters:
            if hp.condition is not None:
                if hp.condition.parent not in seen:
                    raise ValidationError(
                        f"{hp.name!r} conditioned on unknown parent {hp.condition.parent!r}")
                parent = self.by_name(hp.condition.parent)
                if not parent.contains(hp.condition.value):
                    raise ValidationError(
                        f"{hp.name!r} condition value {hp.condition.value!r} "
                        f"outside the domain of {parent.name!r}")
        for hp in self.hyperparameters:
            depth(self, hp.name)  # raises on condition cycles


def _validate_hyperparameter(hp: Hyperparameter) -> None:
    if hp.kind not in HP_KINDS:
        raise ValidationError(f"{hp.name!r}: unknown kind {hp.kind!r}")
    if hp.is_numeric:
        if hp.lower is None or hp.upper is None:
            raise ValidationError(f"{hp.name!r}: numeric bounds are required")
        if not hp.lower <= hp.upper:
            raise ValidationError(f"{hp.name!r}: lower bound exceeds upper bound")
        if hp.log_scale and hp.lower <= 0:
            raise ValidationError(f"{hp.name!r}: log scale requires a positive lower bound")
        if hp.kind == KIND_INTEGER and not (
                float(hp.lower).is_integer() and float(hp.upper).is_integer()):
            raise ValidationError(f"{hp.name!r}: integer bounds must be integral")
    else:
        if not hp.choices:
            raise ValidationError(f"{hp.name!r}: categorical needs at least one choice")
        if len(set(map(repr, hp.choices))) != len(hp.choices):
            raise ValidationError(f"{hp.name!r}: duplicate choices")
        if hp.log_scale:
            raise ValidationError(f"{hp.name!r}: log scale is undefined for categoricals")
    if hp.default is None or not hp.contains(hp.default):
        raise ValidationError(f"{hp.name!r}: default {hp.default!r} outside its domain")


def depth(space: SearchSpace, name: str) -> int:
    """Condition-tree depth of a hyperparameter: 1 at the root, +1 per hop."""
    d = 1
    hp = space.by_name(name)
    seen = {name}
    while hp.condition is not None:
        parent = hp.condition.parent
        if parent in seen:
            raise ValidationError(f"condition cycle through {name!r}")
        seen.add(parent)
        hp = space.by_name(parent)
        d += 1
    return d


def merge_search_spaces(spaces: Sequence[SearchSpace]) -> SearchSpace:
    """Union of several search spaces, widened where declarations overlap.

    Numeric bounds widen to the envelope, categorical choice sets union in
    first-seen order, and the first declaration wins for kind metadata
    (default, condition, log scale).  Incompatible kinds for the same name
    raise :class:`MergeError`.
    """
    merged: list[Hyperparameter] = []
    index: dict[str, int] = {}
    for space in spaces:
        for hp in space.hyperparameters:
            if hp.name not in index:
                index[hp.name] = len(merged)
                merged.append(hp)
                continue
            base = merged[index[hp.name]]
            if base.kind != hp.kind:
                raise MergeError(
                    f"{hp.name!r}: incompatible kinds {base.kind!r} vs {hp.kind!r}")
            if base.is_numeric:
                if base.log_scale != hp.log_scale:
                    raise MergeError(f"{hp.name!r}: conflicting log-scale declarations")
                merged[index[hp.name]] = replace(
                    base, lower=min(base.lower, hp.lower), upper=max(base.upper, hp.upper))
            else:
                extra = tuple(c for c in hp.choices if c not in base.choices)
                if extra:
                    merged[index[hp.name]] = replace(base, choices=base.choices + extra)
    result = SearchSpace(hyperparameters=tuple(merged))
    result.validate()
    return result


def pad_with_defaults(config: Mapping[str, Any], merged: SearchSpace) -> dict[str, Any]:
    """Complete a partial config: every hyperparameter gets a value.

    Present entries are kept verbatim; absent ones (inactive or simply never
    sampled) take the merged space's defaults, so downstream distance and
    importance computations always see full vectors.
    """
    for key in config:
        if key not in merged:
            raise NotFoundError(f"config key {key!r} not in the merged search space")
    return {hp.name: config.get(hp.name, hp.default) for hp in merged.hyperparameters}


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineNode:
    node_id: str
    primitive: str
    config_prefix: str = ""


@dataclass(frozen=True)
class PipelineEdge:
    src: str
    dst: str
    columns: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class PipelineGraph:
    nodes: tuple[PipelineNode, ...]
    edges: tuple[PipelineEdge, ...] = ()

    def node(self, node_id: str) -> PipelineNode:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise NotFoundError(f"unknown pipeline node: {node_id!r}")

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.node_id for n in self.nodes)

    def parents(self, node_id: str) -> list[PipelineEdge]:
        return [e for e in self.edges if e.dst == node_id]

    def children(self, node_id: str) -> list[PipelineEdge]:
        return [e for e in self.edges if e.src == node_id]

    def source(self) -> PipelineNode:
        roots = [n for n in self.nodes if not self.parents(n.node_id)]
        if len(roots) != 1:
            raise ValidationError(f"pipeline must have exactly one source, found {len(roots)}")
        return roots[0]

    def sink(self) -> PipelineNode:
        leaves = [n for n in self.nodes if not self.children(n.node_id)]
        if len(leaves) != 1:
            raise ValidationError(f"pipeline must have exactly one sink, found {len(leaves)}")
        return leaves[0]

    def topo_order(self) -> list[str]:
        return topological_order(self.node_ids(), [(e.src, e.dst) for e in self.edges])

    def layers(self) -> dict[str, int]:
        return longest_path_layers(self.node_ids(), [(e.src, e.dst) for e in self.edges])

    def validate(self) -> None:
        ids = self.node_ids()
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate pipeline node ids")
        if not ids:
            raise ValidationError("pipeline has no nodes")
        for e in self.edges:
            if e.src not in ids or e.dst not in ids:
                raise ValidationError(f"edge {e.src!r}->{e.dst!r} references unknown nodes")
            if e.src == e.dst:
                raise ValidationError(f"self-loop on {e.src!r}")
        self.topo_order()  # raises on cycles
        self.source()
        self.sink()
        reachable = self._reachable(self.source().node_id)
        if reachable != set(ids):
            stranded = sorted(set(ids) - reachable)
            raise ValidationError(f"nodes unreachable from the source: {stranded}")
        for n in self.nodes:
            out = self.children(n.node_id)
            if len(out) <= 1:
                for e in out:
                    if e.columns is not None:
                        raise ValidationError(
                            f"edge {e.src!r}->{e.dst!r} carries a column subset "
                            "but its source has a single out-edge")

    def _reachable(self, start: str) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for e in self.children(stack.pop()):
                if e.dst not in seen:
                    seen.add(e.dst)
                    stack.append(e.dst)
        return seen

    def signature(self) -> str:
        """Canonical structure identity: primitives per layer plus edge shape."""
        layer = self.layers()
        nodes = sorted((layer[n.node_id], n.primitive) for n in self.nodes)
        edges = sorted(
            (layer[e.src], self.node(e.src).primitive, layer[e.dst], self.node(e.dst).primitive)
            for e in self.edges)
        return json.dumps([nodes, edges], separators=(",", ":"))


def topological_order(ids: Sequence[str], edges: Iterable[tuple[str, str]]) -> list[str]:
    """Kahn's algorithm; ready nodes leave in declaration order. Raises on cycles."""
    edges = list(edges)
    indeg = {i: 0 for i in ids}
    for _, dst in edges:
        indeg[dst] += 1
    order: list[str] = []
    ready = [i for i in ids if indeg[i] == 0]
    while ready:
        nid = ready.pop(0)
        order.append(nid)
        for src, dst in edges:
            if src == nid:
                indeg[dst] -= 1
                if indeg[dst] == 0:
                    ready.append(dst)
    if len(order) != len(ids):
        raise ValidationError("graph contains a cycle")
    return order


def longest_path_layers(ids: Sequence[str], edges: Iterable[tuple[str, str]]) -> dict[str, int]:
    """Topological layer per node: longest path length from any root."""
    edges = list(edges)
    layer = {i: 0 for i in ids}
    for nid in topological_order(ids, edges):
        for src, dst in edges:
            if src == nid:
                layer[dst] = max(layer[dst], layer[nid] + 1)
    return layer


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "numeric" | "categorical"
    vocabulary: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class Dataset:
    """Immutable tabular dataset: feature columns plus one target column.

    Numeric columns are float64 arrays with NaN for missing cells;
    categorical columns are object arrays of strings with None for missing.
    ``y`` holds integer codes into ``class_labels``.
    """

    columns: tuple[Column, ...]
    data: Mapping[str, np.ndarray]
    target: str
    class_labels: tuple[str, ...]
    y: np.ndarray
    column_order: tuple[str, ...] = ()

    @property
    def n_rows(self) -> int:
        return len(self.y)

    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise NotFoundError(f"unknown column: {name!r}")

    def numeric_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns if c.kind == "numeric")

    def take(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            columns=self.columns,
            data={name: arr[idx] for name, arr in self.data.items()},
            target=self.target,
            class_labels=self.class_labels,
            y=self.y[idx],
            column_order=self.column_order,
        )

    def with_features(self, columns: Sequence[Column],
                      data: Mapping[str, np.ndarray]) -> "Dataset":
        """Same rows and target, different feature columns (transform output)."""
        return Dataset(
            columns=tuple(columns),
            data=dict(data),
            target=self.target,
            class_labels=self.class_labels,
            y=self.y,
            column_order=tuple(c.name for c in columns) + (self.target,),
        )

    def select(self, names: Sequence[str]) -> "Dataset":
        cols = [self.column(n) for n in names]
        return self.with_features(cols, {n: self.data[n] for n in names})

    def replace_values(self, name: str, values: np.ndarray) -> "Dataset":
        self.column(name)
        data = dict(self.data)
        data[name] = values
        return Dataset(self.columns, data, self.target, self.class_labels,
                       self.y, self.column_order)

    @classmethod
    def from_arrays(cls, names: Sequence[str], kinds: Sequence[str],
                    arrays: Sequence[np.ndarray], y_labels: Sequence[str],
                    class_labels: Optional[Sequence[str]] = None,
                    target: str = "target") -> "Dataset":
        """Convenience constructor for programmatic datasets."""
        labels = [str(v) for v in y_labels]
        classes = tuple(class_labels) if class_labels is not None else tuple(sorted(set(labels)))
        lut = {c: i for i, c in enumerate(classes)}
        columns = []
        data = {}
        for name, kind, arr in zip(names, kinds, arrays):
            if kind == "numeric":
                data[name] = np.asarray(arr, dtype=float)
                columns.append(Column(name, kind))
            else:
                values = np.array([None if v is None else str(v) for v in arr], dtype=object)
                vocab = tuple(sorted({v for v in values if v is not None}))
                data[name] = values
                columns.append(Column(name, kind, vocab))
        y = np.array([lut[v] for v in labels], dtype=int)
        return cls(tuple(columns), data, target, classes, y,
                   tuple(names) + (target,))


def _format_number(v: float) -> str:
    if math.isnan(v):
        return ""
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def dataset_from_csv(text: str, target: str,
                     kinds: Optional[Mapping[str, str]] = None,
                     class_labels: Optional[Sequence[str]] = None,
                     path: str = "<csv>") -> Dataset:
    """Parse a UTF-8 CSV with a header row; empty cells are missing values."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise LoadError(path, "empty CSV")
    header = rows[0]
    if len(set(header)) != len(header):
        raise LoadError(path, "duplicate column names in header")
    if target not in header:
        raise LoadError(path, f"target column {target!r} not in header")
    body = rows[1:]
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise LoadError(path, f"row {i + 2} has {len(row)} cells, expected {len(header)}")
    cells = {name: [row[j] for row in body] for j, name in enumerate(header)}

    t_cells = cells[target]
    if any(c == "" for c in t_cells):
        raise LoadError(path, f"target column {target!r} has missing values")
    classes = tuple(class_labels) if class_labels is not None else tuple(sorted(set(t_cells)))
    lut = {c: i for i, c in enumerate(classes)}
    for c in t_cells:
        if c not in lut:
            raise LoadError(path, f"target value {c!r} not in declared class labels")
    if len(classes) < 2:
        raise LoadError(path, "classification needs at least two classes")
    y = np.array([lut[c] for c in t_cells], dtype=int)

    columns: list[Column] = []
    data: dict[str, np.ndarray] = {}
    for name in header:
        if name == target:
            continue
        col = cells[name]
        kind = (kinds or {}).get(name)
        if kind is None:
            kind = "numeric" if _all_numeric(col) else "categorical"
        if kind == "numeric":
            values = np.empty(len(col), dtype=float)
            for i, cell in enumerate(col):
                if cell == "":
                    values[i] = np.nan
                else:
                    try:
                        values[i] = float(cell)
                    except ValueError:
                        raise LoadError(
                            path, f"column {name!r} row {i + 2}: {cell!r} is not numeric")
            columns.append(Column(name, "numeric"))
        else:
            values = np.array([None if c == "" else c for c in col], dtype=object)
            vocab = tuple(sorted({c for c in col if c != ""}))
            columns.append(Column(name, "categorical", vocab))
        data[name] = values
    return Dataset(tuple(columns), data, target, classes, y, tuple(header))


def _all_numeric(cells: Sequence[str]) -> bool:
    seen_value = False
    for c in cells:
        if c == "":
            continue
        seen_value = True
        try:
            float(c)
        except ValueError:
            return False
    return seen_value


def dataset_to_csv(ds: Dataset) -> str:
    """Serialize in canonical form (stable float formatting, "" for missing)."""
    order = [n for n in ds.column_order if n == ds.target or n in ds.data]
    for name in ds.feature_names():
        if name not in order:
            order.append(name)
    if ds.target not in order:
        order.append(ds.target)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(order)
    kind = {c.name: c.kind for c in ds.columns}
    for i in range(ds.n_rows):
        row = []
        for name in order:
            if name == ds.target:
                row.append(ds.class_labels[ds.y[i]])
            elif kind[name] == "numeric":
                row.append(_format_number(float(ds.data[name][i])))
            else:
                v = ds.data[name][i]
                row.append("" if v is None else str(v))
        writer.writerow(row)
    return out.getvalue()


# ---------------------------------------------------------------------------
# candidates and run histories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    pipeline: PipelineGraph
    config: Mapping[str, Any]
    timestamp: float
    train_performance: Optional[float] = None
    validation_performance: Optional[float] = None
    fit_duration: Optional[float] = None
    predict_duration: Optional[float] = None
    budget: Optional[float] = None

    @property
    def scored(self) -> bool:
        return self.validation_performance is not None


@dataclass(frozen=True)
class EnsembleSpec:
    members: tuple[tuple[str, float], ...]  # (candidate_id, weight)


@dataclass(frozen=True)
class RunHistory:
    run_id: str
    metric_name: str
    task: str
    search_spaces: tuple[SearchSpace, ...]
    candidates: tuple[Candidate, ...]
    dataset: Dataset
    ensemble: Optional[EnsembleSpec] = None
    dataset_path: str = ""

    def candidate(self, candidate_id: str) -> Candidate:
        for c in self.candidates:
            if c.candidate_id == candidate_id:
                return c
        raise NotFoundError(f"unknown candidate: {candidate_id!r}")

    def scored_candidates(self) -> tuple[Candidate, ...]:
        return tuple(c for c in self.candidates if c.scored)

    def merged_space(self) -> SearchSpace:
        return merge_search_spaces(self.search_spaces)

    def fold_order(self) -> tuple[Candidate, ...]:
        """Candidates in (timestamp, candidate_id) order, the merge order."""
        return tuple(sorted(self.candidates, key=lambda c: (c.timestamp, c.candidate_id)))


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _expect(doc: Any, path: str, type_: type, what: str = "") -> Any:
    if not isinstance(doc, type_) or (type_ in (int, float) and isinstance(doc, bool)):
        raise LoadError(path, f"expected {what or type_.__name__}, got {type(doc).__name__}")
    return doc


def _get(doc: Mapping, path: str, key: str, type_: type, required: bool = True,
         default: Any = None) -> Any:
    if key not in doc:
        if required:
            raise LoadError(f"{path}.{key}", "missing required field")
        return default
    return _expect(doc[key], f"{path}.{key}", type_)


def _number(doc: Mapping, path: str, key: str, required: bool = True,
            allow_null: bool = False, default: Any = None) -> Optional[float]:
    if key not in doc:
        if required:
            raise LoadError(f"{path}.{key}", "missing required field")
        return default
    v = doc[key]
    if v is None and allow_null:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise LoadError(f"{path}.{key}", f"expected a number, got {type(v).__name__}")
    return float(v)


def _parse_hyperparameter(doc: Any, path: str) -> Hyperparameter:
    _expect(doc, path, dict, "object")
    name = _get(doc, path, "name", str)
    kind = _get(doc, path, "kind", str)
    if kind not in HP_KINDS:
        raise LoadError(f"{path}.kind", f"unknown kind {kind!r}")
    condition = None
    if doc.get("condition") is not None:
        cdoc = _expect(doc["condition"], f"{path}.condition", dict, "object")
        condition = Condition(
            parent=_get(cdoc, f"{path}.condition", "parent", str),
            value=cdoc.get("value"))
        if "value" not in cdoc:
            raise LoadError(f"{path}.condition.value", "missing required field")
    hp = Hyperparameter(
        name=name,
        kind=kind,
        lower=_number(doc, path, "lower", required=False),
        upper=_number(doc, path, "upper", required=False),
        choices=tuple(_get(doc, path, "choices", list, required=False, default=[])),
        default=doc.get("default"),
        log_scale=_get(doc, path, "log_scale", bool, required=False, default=False),
        condition=condition,
    )
    try:
        _validate_hyperparameter(hp)
    except ValidationError as exc:
        raise LoadError(path, str(exc))
    return hp


def _parse_pipeline(doc: Any, path: str) -> PipelineGraph:
    _expect(doc, path, dict, "object")
    nodes = []
    for i, ndoc in enumerate(_get(doc, path, "nodes", list)):
        npath = f"{path}.nodes[{i}]"
        _expect(ndoc, npath, dict, "object")
        nodes.append(PipelineNode(
            node_id=_get(ndoc, npath, "id", str),
            primitive=_get(ndoc, npath, "primitive", str),
            config_prefix=_get(ndoc, npath, "config_prefix", str, required=False, default=""),
        ))
    edges = []
    for i, edoc in enumerate(_get(doc, path, "edges", list, required=False, default=[])):
        epath = f"{path}.edges[{i}]"
        _expect(edoc, epath, dict, "object")
        columns = edoc.get("columns")
        if columns is not None:
            columns = tuple(_expect(columns, f"{epath}.columns", list))
        edges.append(PipelineEdge(
            src=_get(edoc, epath, "from", str),
            dst=_get(edoc, epath, "to", str),
            columns=columns,
        ))
    graph = PipelineGraph(tuple(nodes), tuple(edges))
    try:
        graph.validate()
    except ValidationError as exc:
        raise LoadError(path, str(exc))
    return graph


def _check_config(config: Mapping[str, Any], merged: SearchSpace, path: str) -> None:
    for key, value in config.items():
        if key not in merged:
            raise LoadError(f"{path}.{key}", "config key not in any declared search space")
        hp = merged.by_name(key)
        if not hp.contains(value):
            raise LoadError(f"{path}.{key}", f"value {value!r} outside the declared domain")
    for key in config:
        hp = merged.by_name(key)
        cond = hp.condition
        while cond is not None:
            if config.get(cond.parent) != cond.value:
                raise LoadError(
                    f"{path}.{key}",
                    f"active value for inactive hyperparameter "
                    f"(requires {cond.parent!r} == {cond.value!r})")
            cond = merged.by_name(cond.parent).condition


def load_run_document(doc: Mapping[str, Any], *, base_dir: str = ".",
                      dataset_text: Optional[str] = None) -> RunHistory:
    """Build a validated RunHistory from a parsed interchange document.

    ``dataset_text`` overrides reading ``dataset_ref.path`` from disk, which
    keeps tests and in-memory callers filesystem-free.
    """
    _expect(doc, "$", dict, "object")
    version = _get(doc, "$", "version", str)
    major = version.split(".", 1)[0]
    if major != FORMAT_VERSION.split(".", 1)[0]:
        raise LoadError("$.version", f"unsupported major version {version!r}")

    rdoc = _get(doc, "$", "run", dict)
    run_id = _get(rdoc, "$.run", "run_id", str)
    metric = _get(rdoc, "$.run", "metric_name", str)
    task = _get(rdoc, "$.run", "task", str, required=False, default="classification")
    if task != "classification":
        raise LoadError("$.run.task", f"unsupported task {task!r}")

    spaces = []
    sdocs = _get(doc, "$", "search_spaces", list)
    if not sdocs:
        raise LoadError("$.search_spaces", "at least one search space is required")
    for i, sdoc in enumerate(sdocs):
        spath = f"$.search_spaces[{i}]"
        _expect(sdoc, spath, dict, "object")
        hps = tuple(
            _parse_hyperparameter(h, f"{spath}.hyperparameters[{j}]")
            for j, h in enumerate(_get(sdoc, spath, "hyperparameters", list)))
        template = sdoc.get("structure_template")
        if template is not None:
            template = _parse_pipeline(template, f"{spath}.structure_template")
        space = SearchSpace(hps, structure_template=template)
        try:
            space.validate()
        except ValidationError as exc:
            raise LoadError(spath, str(exc))
        spaces.append(space)
    try:
        merged = merge_search_spaces(spaces)
    except MergeError as exc:
        raise LoadError("$.search_spaces", str(exc))

    candidates = []
    seen_ids = set()
    last_ts = 0.0
    for i, cdoc in enumerate(_get(doc, "$", "candidates", list)):
        cpath = f"$.candidates[{i}]"
        _expect(cdoc, cpath, dict, "object")
        cid = _get(cdoc, cpath, "candidate_id", str)
        if cid in seen_ids:
            raise LoadError(f"{cpath}.candidate_id", f"duplicate candidate id {cid!r}")
        seen_ids.add(cid)
        config = _get(cdoc, cpath, "config", dict)
        _check_config(config, merged, f"{cpath}.config")
        ts = _number(cdoc, cpath, "timestamp")
        if ts < 0:
            raise LoadError(f"{cpath}.timestamp", "timestamps must be non-negative")
        if ts < last_ts:
            raise LoadError(f"{cpath}.timestamp", "timestamps must be non-decreasing")
        last_ts = ts
        candidates.append(Candidate(
            candidate_id=cid,
            pipeline=_parse_pipeline(cdoc.get("pipeline"), f"{cpath}.pipeline"),
            config=dict(config),
            timestamp=ts,
            train_performance=_number(cdoc, cpath, "train_performance",
                                      required=False, allow_null=True),
            validation_performance=_number(cdoc, cpath, "validation_performance",
                                           required=True, allow_null=True),
            fit_duration=_number(cdoc, cpath, "fit_duration", required=False, allow_null=True),
            predict_duration=_number(cdoc, cpath, "predict_duration",
                                     required=False, allow_null=True),
            budget=_number(cdoc, cpath, "budget", required=False, allow_null=True),
        ))

    ensemble = None
    if doc.get("ensemble") is not None:
        edoc = _expect(doc["ensemble"], "$.ensemble", dict, "object")
        members = []
        mdocs = _get(edoc, "$.ensemble", "members", list)
        if not mdocs:
            raise LoadError("$.ensemble.members", "ensemble needs at least one member")
        for i, mdoc in enumerate(mdocs):
            mpath = f"$.ensemble.members[{i}]"
            _expect(mdoc, mpath, dict, "object")
            mid = _get(mdoc, mpath, "candidate_id", str)
            if mid not in seen_ids:
                raise LoadError(f"{mpath}.candidate_id", f"unknown candidate {mid!r}")
            weight = _number(mdoc, mpath, "weight")
            if weight <= 0:
                raise LoadError(f"{mpath}.weight", "weights must be positive")
            members.append((mid, weight))
        ensemble = EnsembleSpec(tuple(members))

    ddoc = _get(doc, "$", "dataset_ref", dict)
    dpath = _get(ddoc, "$.dataset_ref", "path", str)
    target = _get(ddoc, "$.dataset_ref", "target", str)
    kinds = None
    if ddoc.get("columns") is not None:
        kinds = {}
        for i, col in enumerate(_expect(ddoc["columns"], "$.dataset_ref.columns", list)):
            colpath = f"$.dataset_ref.columns[{i}]"
            _expect(col, colpath, dict, "object")
            kind = _get(col, colpath, "kind", str)
            if kind not in ("numeric", "categorical"):
                raise LoadError(f"{colpath}.kind", f"unknown column kind {kind!r}")
            kinds[_get(col, colpath, "name", str)] = kind
    labels = ddoc.get("class_labels")
    if labels is not None:
        labels = [str(v) for v in _expect(labels, "$.dataset_ref.class_labels", list)]
    if dataset_text is None:
        full = os.path.join(base_dir, dpath)
        if not os.path.exists(full):
            raise LoadError("$.dataset_ref.path", f"dataset file not found: {full}")
        with open(full, "r", encoding="utf-8") as fh:
            dataset_text = fh.read()
    dataset = dataset_from_csv(dataset_text, target, kinds=kinds,
                               class_labels=labels, path="$.dataset_ref.path")

    return RunHistory(
        run_id=run_id,
        metric_name=metric,
        task=task,
        search_spaces=tuple(spaces),
        candidates=tuple(candidates),
        dataset=dataset,
        ensemble=ensemble,
        dataset_path=dpath,
    )


def load_run_history(path: str) -> RunHistory:
    """Load and validate a run-history JSON file plus its dataset CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LoadError("$", f"invalid JSON: {exc}")
    return load_run_document(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def hyperparameter_doc(hp: Hyperparameter) -> dict[str, Any]:
    """Interchange-format document for one hyperparameter."""
    out: dict[str, Any] = {"name": hp.name, "kind": hp.kind, "default": hp.default}
    if hp.is_numeric:
        out["default"] = float(hp.default)
        out["lower"] = float(hp.lower)
        out["upper"] = float(hp.upper)
        if hp.log_scale:
            out["log_scale"] = True
    else:
        out["choices"] = list(hp.choices)
    if hp.condition is not None:
        out["condition"] = {"parent": hp.condition.parent, "value": hp.condition.value}
    return out


def pipeline_doc(p: PipelineGraph) -> dict[str, Any]:
    """Interchange-format document for one pipeline graph."""
    return {
        "nodes": [{"id": n.node_id, "primitive": n.primitive,
                   "config_prefix": n.config_prefix} for n in p.nodes],
        "edges": [
            {"from": e.src, "to": e.dst, **({"columns": list(e.columns)}
                                            if e.columns is not None else {})}
            for e in p.edges],
    }


def serialize_run_history(history: RunHistory) -> dict[str, Any]:
    """Inverse of loading: a document that reloads to an equal history."""
    doc: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "run": {"run_id": history.run_id, "metric_name": history.metric_name,
                "task": history.task},
        "search_spaces": [
            {"hyperparameters": [hyperparameter_doc(hp) for hp in s.hyperparameters],
             **({"structure_template": pipeline_doc(s.structure_template)}
                if s.structure_template is not None else {})}
            for s in history.search_spaces],
        "candidates": [
            {"candidate_id": c.candidate_id,
             "pipeline": pipeline_doc(c.pipeline),
             "config": dict(c.config),
             "timestamp": c.timestamp,
             "train_performance": c.train_performance,
             "validation_performance": c.validation_performance,
             "fit_duration": c.fit_duration,
             "predict_duration": c.predict_duration,
             "budget": c.budget}
            for c in history.candidates],
        "dataset_ref": {
            "path": history.dataset_path or "dataset.csv",
            "target": history.dataset.target,
            "columns": [{"name": c.name, "kind": c.kind} for c in history.dataset.columns],
            "class_labels": list(history.dataset.class_labels),
        },
    }
    if history.ensemble is not None:
        doc["ensemble"] = {
            "members": [{"candidate_id": cid, "weight": w}
                        for cid, w in history.ensemble.members]}
    return doc


def write_run_history(history: RunHistory, path: str) -> None:
    """Write the run document and its dataset CSV next to each other."""
    doc = serialize_run_history(history)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    csv_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                            doc["dataset_ref"]["path"])
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(history.dataset))
