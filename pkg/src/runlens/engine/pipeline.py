"""Refitting candidate pipelines and inspecting their intermediate data.

A pipeline is a single-source, single-sink DAG of primitives.  Data flows
along edges; an edge's column subset restricts what the child sees, and a
node with several parents receives their outputs concatenated in edge order.
The sink must be a classifier.  Fitting happens on a stratified 75/25 train
split derived from the run seed, and every node's full-data output is kept so
any step can be previewed or explained afterwards.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import (NotFoundError, UnsupportedPrimitiveError,
                      UnsupportedTopologyError, ValidationError)
from ..model import SOURCE_NODE, Candidate, Column, Dataset, PipelineGraph
from .primitives import CLASSIFIERS, PRIMITIVES, Primitive, make_primitive

TRAIN_FRACTION = 0.75


def stratified_split(y: np.ndarray, seed: int,
                     train_fraction: float = TRAIN_FRACTION) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled split; every class keeps at least one row per side
    where it has two or more rows."""
    rng = np.random.default_rng(seed)
    train: list[np.ndarray] = []
    val: list[np.ndarray] = []
    for c in np.unique(y):
        rows = np.nonzero(y == c)[0]
        perm = rows[rng.permutation(len(rows))]
        n_train = int(round(train_fraction * len(rows)))
        n_train = min(max(n_train, 1), len(rows) - 1) if len(rows) > 1 else len(rows)
        train.append(perm[:n_train])
        val.append(perm[n_train:])
    train_idx = np.sort(np.concatenate(train))
    val_idx = np.sort(np.concatenate(val)) if any(len(v) for v in val) else np.array([], dtype=int)
    return train_idx, val_idx


def node_seed(seed: int, node_id: str) -> int:
    return (seed ^ zlib.crc32(node_id.encode("utf-8"))) & 0x7FFFFFFF


def _node_params(candidate: Candidate, prefix: str) -> dict:
    if not prefix:
        return {}
    head = prefix + ":"
    # "algorithm" is the step-selector convention: it names which primitive
    # occupies the step and is never a parameter of the primitive itself.
    return {k[len(head):]: v for k, v in candidate.config.items()
            if k.startswith(head) and k[len(head):] != "algorithm"}


def _concat_inputs(frames: list[tuple[str, Dataset]]) -> Dataset:
    """Concatenate parent outputs column-wise; name collisions get a
    parent-id prefix so routing stays unambiguous."""
    base = frames[0][1]
    columns: list[Column] = []
    data = {}
    seen: set[str] = set()
    for src, frame in frames:
        for col in frame.columns:
            name = col.name
            if name in seen:
                name = f"{src}:{col.name}"
            seen.add(name)
            columns.append(Column(name, col.kind, col.vocabulary))
            data[name] = frame.data[col.name]
    return base.with_features(columns, data)


def _restrict(frame: Dataset, columns: Optional[tuple[str, ...]],
              edge_desc: str) -> Dataset:
    if columns is None:
        return frame
    missing = [c for c in columns if c not in frame.feature_names()]
    if missing:
        raise ValidationError(
            f"edge {edge_desc} routes columns {missing} that its source does not produce")
    return frame.select(columns)


@dataclass
class FittedPipeline:
    """A refit candidate: fitted primitives plus cached per-node outputs."""

    candidate: Candidate
    dataset: Dataset
    seed: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    fitted: dict[str, Primitive]
    node_outputs: dict[str, Dataset]
    fit_seconds: float
    class_labels: tuple[str, ...] = ()

    @property
    def graph(self) -> PipelineGraph:
        return self.candidate.pipeline

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        """Run the full pipeline on fresh rows of the original feature space."""
        outputs: dict[str, Dataset] = {}
        graph = self.graph
        order = graph.topo_order()
        for nid in order:
            node = graph.node(nid)
            parents = graph.parents(nid)
            if not parents:
                frame = ds
            else:
                frame = _concat_inputs([
                    (e.src, _restrict(outputs[e.src], e.columns, f"{e.src!r}->{e.dst!r}"))
                    for e in parents])
            prim = self.fitted[nid]
            if node.primitive in CLASSIFIERS:
                return prim.predict_proba(frame)
            outputs[nid] = prim.transform(frame)
        raise ValidationError("pipeline has no classifier sink")

    def predict_labels(self, ds: Dataset) -> np.ndarray:
        return np.argmax(self.predict_proba(ds), axis=1)

    def tail_oracle(self, node_id: str) -> "TailOracle":
        return TailOracle(self, node_id)

    def validation_data(self) -> Dataset:
        return self.dataset.take(self.val_idx)

    def train_data(self) -> Dataset:
        return self.dataset.take(self.train_idx)


def fit_candidate(candidate: Candidate, dataset: Dataset, seed: int = 0) -> FittedPipeline:
    """Refit a candidate's pipeline on the run dataset, deterministically."""
    graph = candidate.pipeline
    graph.validate()
    unknown = [n.primitive for n in graph.nodes if n.primitive not in PRIMITIVES]
    if unknown:
        raise UnsupportedPrimitiveError(unknown)
    sink = graph.sink()
    if sink.primitive not in CLASSIFIERS:
        raise ValidationError(f"pipeline sink {sink.primitive!r} is not a classifier")
    for node in graph.nodes:
        if node.primitive in CLASSIFIERS and node.node_id != sink.node_id:
            raise ValidationError(
                f"classifier {node.primitive!r} at interior node {node.node_id!r}")

    train_idx, val_idx = stratified_split(dataset.y, seed)
    started = time.perf_counter()
    fitted: dict[str, Primitive] = {}
    outputs: dict[str, Dataset] = {SOURCE_NODE: dataset}
    for nid in graph.topo_order():
        node = graph.node(nid)
        parents = graph.parents(nid)
        if not parents:
            frame = dataset
        else:
            frame = _concat_inputs([
                (e.src, _restrict(outputs[e.src], e.columns, f"{e.src!r}->{e.dst!r}"))
                for e in parents])
        prim = make_primitive(node.primitive, _node_params(candidate, node.config_prefix),
                              seed=node_seed(seed, nid))
        if node.primitive in CLASSIFIERS:
            prim.fit(frame.take(train_idx))
            fitted[nid] = prim
            proba = prim.predict_proba(frame)
            columns = [Column(f"p({lbl})", "numeric") for lbl in dataset.class_labels]
            outputs[nid] = frame.with_features(
                columns, {c.name: proba[:, i] for i, c in enumerate(columns)})
        else:
            prim.fit(frame.take(train_idx))
            fitted[nid] = prim
            outputs[nid] = prim.transform(frame)
    return FittedPipeline(
        candidate=candidate,
        dataset=dataset,
        seed=seed,
        train_idx=train_idx,
        val_idx=val_idx,
        fitted=fitted,
        node_outputs=outputs,
        fit_seconds=time.perf_counter() - started,
        class_labels=dataset.class_labels,
    )


def transform_until(fp: FittedPipeline, node_id: str) -> Dataset:
    """Dataset after applying the step's ancestors and the step itself.

    The virtual id ``__source__`` returns the input data unchanged; a
    classifier step yields its per-class probability columns.
    """
    if node_id in fp.node_outputs:
        return fp.node_outputs[node_id]
    raise NotFoundError(f"unknown pipeline node: {node_id!r}")


class TailOracle:
    """Predictions through the pipeline remainder after a given node.

    Only defined when the remaining sub-graph is a chain fed exclusively by
    the anchor node: true for every node of a linear pipeline, for any node at
    or after the final join of a DAG, and for the virtual source.
    """

    def __init__(self, fp: FittedPipeline, node_id: str):
        self.fp = fp
        self.node_id = node_id
        graph = fp.graph
        if node_id == SOURCE_NODE:
            self.chain = graph.topo_order()
            self.class_labels = fp.class_labels
            return
        graph.node(node_id)
        reachable: list[str] = []
        frontier = [e.dst for e in graph.children(node_id)]
        seen = set(frontier)
        while frontier:
            nid = frontier.pop(0)
            reachable.append(nid)
            for e in graph.children(nid):
                if e.dst not in seen:
                    seen.add(e.dst)
                    frontier.append(e.dst)
        allowed = {node_id} | set(reachable)
        for nid in reachable:
            parents = graph.parents(nid)
            if len(parents) != 1 or parents[0].src not in allowed:
                raise UnsupportedTopologyError(
                    f"steps after {node_id!r} are not a chain; "
                    "explanations are defined at or after the final join")
        order = graph.topo_order()
        self.chain = [nid for nid in order if nid in set(reachable)]
        if not self.chain:
            raise UnsupportedTopologyError(
                f"{node_id!r} is the pipeline sink; nothing remains to explain against")
        self.class_labels = fp.class_labels

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def predict_proba(self, frame: Dataset) -> np.ndarray:
        graph = self.fp.graph
        for nid in self.chain:
            prim = self.fp.fitted[nid]
            if graph.node(nid).primitive in CLASSIFIERS:
                return prim.predict_proba(frame)
            frame = prim.transform(frame)
        raise ValidationError("pipeline has no classifier sink")
