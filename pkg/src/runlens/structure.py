"""Incremental merging of sampled pipeline structures into one overview DAG.

Each new pipeline is aligned against the merged graph so far: a cost matrix
over node pairs is solved with the Hungarian algorithm, matched nodes with
identical primitives collapse into compound nodes, everything else is added.
Folding candidates in timestamp order yields a time-lapse of the structure
search.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ValidationError
from .model import (Candidate, PipelineGraph, RunHistory, longest_path_layers,
                    topological_order)

# Cost model for node alignment.  Substituting a node costs nothing when the
# primitives are identical, one unit otherwise, plus a per-layer shift penalty;
# additions and deletions cost one unit each (dummy rows/columns).
SUBSTITUTION_MISMATCH_COST = 1.0
LAYER_SHIFT_COST = 0.5
ADD_DELETE_COST = 1.0


@dataclass(frozen=True)
class MergedNode:
    merged_id: str
    primitive: str
    members: tuple[str, ...]  # candidate ids, in merge order
    member_nodes: tuple[tuple[str, str, str], ...]  # (candidate, node id, config prefix)

    @property
    def occurrence(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MergedEdge:
    src: str
    dst: str
    columns: tuple[str, ...] | None = None


@dataclass(frozen=True)
class MergedGraph:
    nodes: tuple[MergedNode, ...] = ()
    edges: tuple[MergedEdge, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def node(self, merged_id: str) -> MergedNode:
        for n in self.nodes:
            if n.merged_id == merged_id:
                return n
        raise ValidationError(f"unknown merged node: {merged_id!r}")

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.merged_id for n in self.nodes)

    def layers(self) -> dict[str, int]:
        return longest_path_layers(self.node_ids(), [(e.src, e.dst) for e in self.edges])

    def children(self, merged_id: str) -> list[MergedEdge]:
        return [e for e in self.edges if e.src == merged_id]

    def parents(self, merged_id: str) -> list[MergedEdge]:
        return [e for e in self.edges if e.dst == merged_id]

    def max_path_length(self) -> int:
        """Number of nodes on the longest root-to-leaf path."""
        if self.is_empty:
            return 0
        return max(self.layers().values()) + 1

    def member_candidates(self) -> set[str]:
        out: set[str] = set()
        for n in self.nodes:
            out.update(n.members)
        return out

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": n.merged_id, "primitive": n.primitive,
                 "members": list(n.members), "occurrence": n.occurrence,
                 "layer": self.layers()[n.merged_id]}
                for n in self.nodes],
            "edges": [
                {"from": e.src, "to": e.dst,
                 "columns": list(e.columns) if e.columns is not None else None}
                for e in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph merged {", "  rankdir=LR;",
                 "  node [shape=box, style=rounded];"]
        for n in self.nodes:
            label = f"{n.primitive}\\n({n.occurrence})"
            lines.append(f'  "{n.merged_id}" [label="{label}"];')
        for e in self.edges:
            attr = ""
            if e.columns is not None:
                attr = f' [label="{", ".join(e.columns)}"]'
            lines.append(f'  "{e.src}" -> "{e.dst}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CostMatrix:
    """Square assignment costs between two node sets, dummy-padded."""

    matrix: np.ndarray
    n1: int
    n2: int


GraphLike = Union[PipelineGraph, MergedGraph]


def _node_view(graph: GraphLike) -> tuple[list[str], list[int]]:
    """Primitive names and topological layers, in stored node order."""
    if isinstance(graph, PipelineGraph):
        layer = graph.layers()
        return ([n.primitive for n in graph.nodes],
                [layer[n.node_id] for n in graph.nodes])
    layer = graph.layers()
    return ([n.primitive for n in graph.nodes],
            [layer[n.merged_id] for n in graph.nodes])


def build_cost_matrix(g1: GraphLike, g2: GraphLike) -> CostMatrix:
    """Alignment costs: rows are g1's nodes, columns g2's, padded square.

    Substitution costs 0 for identical primitives in the same topological
    layer, 1 for differing primitives, plus ``LAYER_SHIFT_COST`` per layer of
    shift.  Dummy rows/columns encode additions/deletions at unit cost.
    """
    prims1, layers1 = _node_view(g1)
    prims2, layers2 = _node_view(g2)
    n1, n2 = len(prims1), len(prims2)
    size = max(n1, n2)
    matrix = np.full((size, size), ADD_DELETE_COST, dtype=float)
    for i in range(n1):
        for j in range(n2):
            cost = 0.0 if prims1[i] == prims2[j] else SUBSTITUTION_MISMATCH_COST
            cost += LAYER_SHIFT_COST * abs(layers1[i] - layers2[j])
            matrix[i, j] = cost
    return CostMatrix(matrix, n1, n2)


def hungarian(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost row-to-column assignment of a square matrix.

    Shortest-augmenting-path formulation with dual potentials, O(n^3).
    Returns ``assign`` with ``assign[i]`` the column matched to row ``i``.
    """
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("cost matrix must be square")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    INF = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row assigned to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    assign = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        assign[match[j] - 1] = j - 1
    return assign


def assignment_cost(matrix: np.ndarray, assign: Sequence[int]) -> float:
    return float(sum(matrix[i, j] for i, j in enumerate(assign)))


def from_pipeline(pipeline: PipelineGraph, candidate_id: str) -> MergedGraph:
    """Lift a single pipeline into a merged graph."""
    ids = {n.node_id: f"m{i}" for i, n in enumerate(pipeline.nodes)}
    nodes = tuple(
        MergedNode(ids[n.node_id], n.primitive, (candidate_id,),
                   ((candidate_id, n.node_id, n.config_prefix),))
        for n in pipeline.nodes)
    edges = tuple(MergedEdge(ids[e.src], ids[e.dst], e.columns) for e in pipeline.edges)
    return MergedGraph(nodes, edges)


def _would_cycle(base: MergedGraph, pipeline: PipelineGraph,
                 mapping: dict[str, str]) -> bool:
    """True if compounding per ``mapping`` (g2 node id -> merged id) cycles."""
    ids = list(base.node_ids())
    alias = dict(mapping)
    for n in pipeline.nodes:
        if n.node_id not in alias:
            placeholder = f"+{n.node_id}"
            alias[n.node_id] = placeholder
            ids.append(placeholder)
    edges = [(e.src, e.dst) for e in base.edges]
    edges += [(alias[e.src], alias[e.dst]) for e in pipeline.edges]
    try:
        topological_order(ids, edges)
        return False
    except ValidationError:
        return True


def merge(base: MergedGraph, pipeline: PipelineGraph, candidate_id: str) -> MergedGraph:
    """Fold one candidate's pipeline into the merged structure graph.

    The Hungarian assignment over the padded cost matrix selects node pairs;
    a selected pair whose primitives are identical becomes a compound node.
    Matches are applied in ascending cost order and any match that would turn
    the merged graph cyclic is demoted to a plain addition, so the result
    stays a DAG.  Remaining pipeline nodes are appended as new merged nodes
    and the edge sets are united (exact duplicates collapse).
    """
    if base.is_empty:
        return from_pipeline(pipeline, candidate_id)
    cm = build_cost_matrix(base, pipeline)
    assign = hungarian(cm.matrix)
    topo_pos = {nid: k for k, nid in enumerate(pipeline.topo_order())}

    candidates = []
    for i, j in enumerate(assign):
        if i < cm.n1 and j < cm.n2 and base.nodes[i].primitive == pipeline.nodes[j].primitive:
            candidates.append((cm.matrix[i, j], topo_pos[pipeline.nodes[j].node_id], i, j))
    candidates.sort()

    mapping: dict[str, str] = {}  # pipeline node id -> merged id
    matched_rows: dict[int, int] = {}
    for cost, _, i, j in candidates:
        trial = dict(mapping)
        trial[pipeline.nodes[j].node_id] = base.nodes[i].merged_id
        if not _would_cycle(base, pipeline, trial):
            mapping = trial
            matched_rows[i] = j

    nodes: list[MergedNode] = []
    for i, node in enumerate(base.nodes):
        if i in matched_rows:
            pnode = pipeline.nodes[matched_rows[i]]
            nodes.append(MergedNode(
                node.merged_id, node.primitive,
                node.members + (candidate_id,),
                node.member_nodes + ((candidate_id, pnode.node_id, pnode.config_prefix),)))
        else:
            nodes.append(node)
    next_id = len(base.nodes)
    for pnode in pipeline.nodes:
        if pnode.node_id not in mapping:
            merged_id = f"m{next_id}"
            next_id += 1
            mapping[pnode.node_id] = merged_id
            nodes.append(MergedNode(
                merged_id, pnode.primitive, (candidate_id,),
                ((candidate_id, pnode.node_id, pnode.config_prefix),)))

    edges: list[MergedEdge] = list(base.edges)
    seen = {(e.src, e.dst, e.columns) for e in edges}
    for e in pipeline.edges:
        rewritten = MergedEdge(mapping[e.src], mapping[e.dst], e.columns)
        key = (rewritten.src, rewritten.dst, rewritten.columns)
        if key not in seen:
            seen.add(key)
            edges.append(rewritten)
    return MergedGraph(tuple(nodes), tuple(edges))


def snapshot(history: RunHistory, t: float) -> MergedGraph:
    """Merged structure graph over all candidates with timestamp <= t."""
    graph = MergedGraph()
    for c in history.fold_order():
        if c.timestamp <= t:
            graph = merge(graph, c.pipeline, c.candidate_id)
    return graph


def final_graph(history: RunHistory) -> MergedGraph:
    return snapshot(history, float("inf"))


class SnapshotCache:
    """Prefix-fold cache: snapshots for growing t reuse earlier merges."""

    def __init__(self, history: RunHistory):
        self._order = history.fold_order()
        self._prefixes: list[MergedGraph] = [MergedGraph()]
        self._lock = threading.Lock()

    def at(self, t: float) -> MergedGraph:
        count = sum(1 for c in self._order if c.timestamp <= t)
        with self._lock:
            while len(self._prefixes) <= count:
                k = len(self._prefixes) - 1
                nxt = merge(self._prefixes[-1], self._order[k].pipeline,
                            self._order[k].candidate_id)
                self._prefixes.append(nxt)
            return self._prefixes[count]

    def final(self) -> MergedGraph:
        return self.at(float("inf"))

    def frame_times(self) -> list[float]:
        return [c.timestamp for c in self._order]
