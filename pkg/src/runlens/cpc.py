"""Conditional parallel coordinates over a merged structure graph.

The axis tree has three levels: one axis per pipeline step of the merged
graph (parallel branches become simultaneous vertical lanes), algorithm
choices under each step, and hyperparameter axes under each algorithm.
Candidates project onto the tree as polylines; axes a candidate does not
touch carry an explicit MISSING marker. A per-hyperparameter sampling
history (scatter points plus a domain histogram) backs the search-strategy
view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import NotFoundError, ValidationError
from .model import (Candidate, Hyperparameter, RunHistory, SearchSpace)
from .structure import MergedGraph

HISTOGRAM_BINS = 20

STEP = "step"
ALGORITHM = "algorithm"
HYPERPARAMETER = "hyperparameter"


class _Missing:
    __slots__ = ()

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _Missing()


@dataclass
class CpcAxis:
    axis_id: str
    kind: str
    label: str
    layer: int = -1
    lane: tuple[int, ...] = ()
    choices: tuple[str, ...] = ()
    hp: Optional[Hyperparameter] = None
    merged_id: Optional[str] = None
    primitive: Optional[str] = None
    occurrence: int = 0
    children: list["CpcAxis"] = field(default_factory=list)

    @property
    def holds_coordinates(self) -> bool:
        return self.kind != ALGORITHM

    def position_of(self, value: Any) -> float:
        """Normalized [0, 1] position of a raw value on this axis."""
        if self.kind == STEP or (self.hp is not None and not self.hp.is_numeric):
            pool = self.choices
            if value not in pool:
                raise ValidationError(f"{value!r} is not a choice of axis {self.axis_id}")
            if len(pool) == 1:
                return 0.5
            return pool.index(value) / (len(pool) - 1)
        hp = self.hp
        lo, hi, v = hp.lower, hp.upper, float(value)
        if hp.log_scale:
            lo, hi, v = math.log(lo), math.log(hi), math.log(v)
        if hi == lo:
            return 0.5
        return (v - lo) / (hi - lo)

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"axis_id": self.axis_id, "kind": self.kind,
                               "label": self.label}
        if self.kind == STEP:
            doc["layer"] = self.layer
            doc["lane"] = list(self.lane)
            doc["choices"] = list(self.choices)
            doc["algorithms"] = [c.to_json() for c in self.children
                                 if c.kind == ALGORITHM]
            shared = [c.to_json() for c in self.children
                      if c.kind == HYPERPARAMETER]
            if shared:
                doc["hyperparameters"] = shared
        elif self.kind == ALGORITHM:
            doc["node"] = self.merged_id
            doc["primitive"] = self.primitive
            doc["occurrence"] = self.occurrence
            doc["hyperparameters"] = [c.to_json() for c in self.children]
        else:
            hp = self.hp
            doc["name"] = hp.name
            doc["hp_kind"] = hp.kind
            if hp.is_numeric:
                doc["lower"] = hp.lower
                doc["upper"] = hp.upper
                doc["log_scale"] = hp.log_scale
            else:
                doc["choices"] = list(hp.choices)
            if hp.condition is not None:
                doc["condition"] = {"parent": hp.condition.parent,
                                    "value": hp.condition.value}
            doc["children"] = [c.to_json() for c in self.children]
        return doc


@dataclass
class CpcAxisTree:
    steps: list[CpcAxis]
    global_axes: list[CpcAxis]
    axes: dict[str, CpcAxis]
    member_to_step: dict[tuple[str, str], str]
    member_to_node: dict[tuple[str, str], str]

    def axis(self, axis_id: str) -> CpcAxis:
        try:
            return self.axes[axis_id]
        except KeyError:
            raise NotFoundError(f"unknown axis: {axis_id!r}") from None

    def coordinate_axes(self) -> list[CpcAxis]:
        """Axes that carry polyline coordinates, in display order."""
        out: list[CpcAxis] = []

        def visit(axis: CpcAxis) -> None:
            if axis.holds_coordinates:
                out.append(axis)
            for child in axis.children:
                visit(child)

        for step in self.steps:
            visit(step)
        for axis in self.global_axes:
            visit(axis)
        return out

    def to_json(self) -> dict:
        by_layer: dict[int, list[CpcAxis]] = {}
        for step in self.steps:
            by_layer.setdefault(step.layer, []).append(step)
        return {
            "steps": [{"layer": layer,
                       "lanes": [s.to_json() for s in lanes]}
                      for layer, lanes in sorted(by_layer.items())],
            "global": [a.to_json() for a in self.global_axes],
        }


def _lane_paths(merged: MergedGraph) -> dict[str, tuple[int, ...]]:
    """Vertical lane of every merged node.

    Column-labeled splits open sub-lanes numbered by edge order; joins fall
    back to the longest common prefix of the parents' lanes. Unlabeled
    out-degree > 1 marks alternatives across candidates, not parallelism,
    and keeps the parent's lane.
    """
    layers = merged.layers()
    ids = merged.node_ids()
    stored = {node_id: i for i, node_id in enumerate(ids)}
    order = sorted(ids, key=lambda i: (layers[i], stored[i]))
    lanes: dict[str, tuple[int, ...]] = {}
    for node_id in order:
        parents = merged.parents(node_id)
        if not parents:
            lanes[node_id] = ()
            continue
        candidates: list[tuple[int, ...]] = []
        for edge in parents:
            base = lanes[edge.src]
            labeled = [e for e in merged.children(edge.src) if e.columns is not None]
            if edge.columns is not None and len(labeled) > 1:
                candidates.append(base + (labeled.index(edge),))
            else:
                candidates.append(base)
        lane = candidates[0]
        for other in candidates[1:]:
            common = 0
            for a, b in zip(lane, other):
                if a != b:
                    break
                common += 1
            lane = lane[:common]
        lanes[node_id] = lane
    return lanes


def _step_axis_id(layer: int, lane: tuple[int, ...]) -> str:
    if not lane:
        return f"step:{layer}"
    return f"step:{layer}:" + ".".join(str(i) for i in lane)


def build_axes(merged: MergedGraph, space: SearchSpace) -> CpcAxisTree:
    """Axis tree for a merged structure graph and its (merged) search space."""
    layers = merged.layers()
    lanes = _lane_paths(merged)

    regions: dict[tuple[int, tuple[int, ...]], list] = {}
    for node in merged.nodes:
        key = (layers[node.merged_id], lanes[node.merged_id])
        regions.setdefault(key, []).append(node)

    steps: list[CpcAxis] = []
    algo_axes: dict[str, CpcAxis] = {}
    member_to_step: dict[tuple[str, str], str] = {}
    member_to_node: dict[tuple[str, str], str] = {}
    node_prefixes: dict[str, tuple[str, ...]] = {}
    for (layer, lane), nodes in sorted(regions.items()):
        axis_id = _step_axis_id(layer, lane)
        choices: list[str] = []
        step = CpcAxis(axis_id=axis_id, kind=STEP, label=f"step {layer + 1}",
                       layer=layer, lane=lane)
        for node in nodes:
            if node.primitive not in choices:
                choices.append(node.primitive)
            algo = CpcAxis(axis_id=f"node:{node.merged_id}", kind=ALGORITHM,
                           label=node.primitive, layer=layer, lane=lane,
                           merged_id=node.merged_id, primitive=node.primitive,
                           occurrence=node.occurrence)
            step.children.append(algo)
            algo_axes[node.merged_id] = algo
            prefixes = []
            for cid, node_id, prefix in node.member_nodes:
                member_to_step[(cid, node_id)] = axis_id
                member_to_node[(cid, node_id)] = node.merged_id
                if prefix and prefix not in prefixes:
                    prefixes.append(prefix)
            node_prefixes[node.merged_id] = tuple(prefixes)
        step.choices = tuple(choices)
        steps.append(step)

    # hyperparameter axes: under the algorithm its condition names, else
    # nested under the condition parent's axis, else under its unique
    # prefix-matched algorithm, else on the shared step axis, else in the
    # trailing global group.
    hp_axes: dict[str, CpcAxis] = {}
    global_axes: list[CpcAxis] = []
    step_by_id = {s.axis_id: s for s in steps}

    def scope_nodes(hp: Hyperparameter) -> list[str]:
        out = []
        for node in merged.nodes:
            if any(hp.name.startswith(p + ":") for p in node_prefixes[node.merged_id]):
                out.append(node.merged_id)
        return out

    def placement(hp: Hyperparameter, may_wait: bool) -> Optional[list[CpcAxis]]:
        scope = scope_nodes(hp)
        if hp.condition is not None:
            named = [m for m in scope
                     if merged.node(m).primitive == hp.condition.value]
            if named:
                return algo_axes[named[0]].children
            if hp.condition.parent in hp_axes:
                return hp_axes[hp.condition.parent].children
            if may_wait:
                return None
        if len(scope) == 1:
            return algo_axes[scope[0]].children
        if scope:
            first = scope[0]
            return step_by_id[_step_axis_id(layers[first], lanes[first])].children
        return global_axes

    pending = list(space.hyperparameters)
    while pending:
        rest: list[Hyperparameter] = []
        for hp in pending:
            names_left = {h.name for h in pending if h is not hp}
            may_wait = (hp.condition is not None
                        and hp.condition.parent in names_left)
            home = placement(hp, may_wait)
            if home is None:
                rest.append(hp)
                continue
            axis = CpcAxis(axis_id=f"hp:{hp.name}", kind=HYPERPARAMETER,
                           label=hp.name.rsplit(":", 1)[-1], hp=hp,
                           choices=tuple() if hp.is_numeric else tuple(hp.choices))
            home.append(axis)
            hp_axes[hp.name] = axis
        if len(rest) == len(pending):
            # circular or dangling conditions: place without waiting
            for hp in rest:
                axis = CpcAxis(axis_id=f"hp:{hp.name}", kind=HYPERPARAMETER,
                               label=hp.name.rsplit(":", 1)[-1], hp=hp,
                               choices=tuple() if hp.is_numeric else tuple(hp.choices))
                placement(hp, False).append(axis)
                hp_axes[hp.name] = axis
            rest = []
        pending = rest

    axes: dict[str, CpcAxis] = {}

    def register(axis: CpcAxis) -> None:
        axes[axis.axis_id] = axis
        for child in axis.children:
            register(child)

    for step in steps:
        register(step)
    for axis in global_axes:
        register(axis)
    return CpcAxisTree(steps=steps, global_axes=global_axes, axes=axes,
                       member_to_step=member_to_step, member_to_node=member_to_node)


@dataclass
class CandidatePolyline:
    candidate_id: str
    coordinates: list[tuple[str, Any, Optional[float]]]  # (axis_id, value | MISSING, position)

    def value_at(self, axis_id: str) -> Any:
        for aid, value, _ in self.coordinates:
            if aid == axis_id:
                return value
        raise NotFoundError(f"polyline has no axis {axis_id!r}")

    def non_missing_count(self) -> int:
        return sum(1 for _, value, _ in self.coordinates if value is not MISSING)

    def to_json(self) -> dict:
        coords = []
        for axis_id, value, position in self.coordinates:
            if value is MISSING:
                coords.append({"axis": axis_id, "missing": True})
            else:
                coords.append({"axis": axis_id, "value": value, "position": position})
        return {"candidate_id": self.candidate_id, "coordinates": coords}


def project(candidate: Candidate, axes: CpcAxisTree) -> CandidatePolyline:
    """Polyline of one candidate: a coordinate on every axis, MISSING where
    the candidate lacks the step or the hyperparameter is inactive."""
    step_value: dict[str, str] = {}
    for node in candidate.pipeline.nodes:
        key = (candidate.candidate_id, node.node_id)
        merged_id = axes.member_to_node.get(key)
        if merged_id is None:
            continue
        step_id = axes.member_to_step[key]
        step_value.setdefault(step_id, axes.axes[f"node:{merged_id}"].primitive)

    coords: list[tuple[str, Any, Optional[float]]] = []
    for axis in axes.coordinate_axes():
        if axis.kind == STEP:
            value = step_value.get(axis.axis_id)
        else:
            value = candidate.config.get(axis.hp.name)
        if value is None:
            coords.append((axis.axis_id, MISSING, None))
        else:
            coords.append((axis.axis_id, value, axis.position_of(value)))
    return CandidatePolyline(candidate_id=candidate.candidate_id, coordinates=coords)


def _check_predicate(axis: CpcAxis, predicate: Mapping) -> None:
    if axis.kind == ALGORITHM:
        raise ValidationError(f"axis {axis.axis_id} is structural; brush its step axis")
    numeric = axis.kind == HYPERPARAMETER and axis.hp.is_numeric
    if numeric:
        if "min" not in predicate and "max" not in predicate:
            raise ValidationError(f"numeric axis {axis.axis_id} needs a min/max range")
        lo = predicate.get("min", axis.hp.lower)
        hi = predicate.get("max", axis.hp.upper)
        if lo > hi:
            raise ValidationError(f"axis {axis.axis_id}: min {lo} exceeds max {hi}")
        if lo < axis.hp.lower or hi > axis.hp.upper:
            raise ValidationError(
                f"axis {axis.axis_id}: range [{lo}, {hi}] outside bounds "
                f"[{axis.hp.lower}, {axis.hp.upper}]")
    else:
        chosen = predicate.get("choices")
        if not chosen:
            raise ValidationError(f"categorical axis {axis.axis_id} needs choices")
        pool = axis.choices
        unknown = [c for c in chosen if c not in pool]
        if unknown:
            raise ValidationError(f"axis {axis.axis_id}: unknown choices {unknown}")


def brush(axes: CpcAxisTree, candidates: Sequence[Candidate],
          predicates: Mapping[str, Mapping]) -> set[str]:
    """Ids of candidates whose polylines satisfy every predicate.

    A predicate is {"min": x, "max": y} on numeric axes or {"choices": [..]}
    on categorical and step axes. MISSING never satisfies a predicate.
    """
    for axis_id, predicate in predicates.items():
        _check_predicate(axes.axis(axis_id), predicate)
    out: set[str] = set()
    for candidate in candidates:
        line = project(candidate, axes)
        values = {aid: v for aid, v, _ in line.coordinates}
        ok = True
        for axis_id, predicate in predicates.items():
            axis = axes.axes[axis_id]
            value = values.get(axis_id, MISSING)
            if value is MISSING:
                ok = False
                break
            if axis.kind == HYPERPARAMETER and axis.hp.is_numeric:
                lo = predicate.get("min", axis.hp.lower)
                hi = predicate.get("max", axis.hp.upper)
                if not lo <= float(value) <= hi:
                    ok = False
                    break
            elif value not in predicate["choices"]:
                ok = False
                break
        if ok:
            out.add(candidate.candidate_id)
    return out


@dataclass
class SamplingSeries:
    hyperparameter: str
    kind: str
    log_scale: bool
    points: list[tuple[float, Any, Optional[float]]]  # (timestamp, value, performance)
    bin_edges: list[float]       # numeric histograms
    bin_choices: list[str]       # categorical histograms
    counts: list[int]

    def to_json(self) -> dict:
        histogram: dict[str, Any] = {"counts": self.counts}
        if self.bin_choices:
            histogram["choices"] = self.bin_choices
        else:
            histogram["edges"] = self.bin_edges
        return {
            "hyperparameter": self.hyperparameter,
            "kind": self.kind,
            "log_scale": self.log_scale,
            "points": [{"timestamp": t, "value": v, "performance": p}
                       for t, v, p in self.points],
            "histogram": histogram,
        }


def sampling_history(history: RunHistory, hp_name: str,
                     bins: int = HISTOGRAM_BINS) -> SamplingSeries:
    """Scatter points and a domain histogram of one hyperparameter's samples.

    Points cover every candidate where the hyperparameter is active, in
    submission order, carrying the stored validation performance untouched.
    """
    space = history.merged_space()
    if hp_name not in space:
        raise NotFoundError(f"unknown hyperparameter: {hp_name!r}")
    hp = space.by_name(hp_name)

    points = [(c.timestamp, c.config[hp_name], c.validation_performance)
              for c in history.fold_order() if hp_name in c.config]
    values = [v for _, v, _ in points]

    if not hp.is_numeric:
        counts = [sum(1 for v in values if v == choice) for choice in hp.choices]
        return SamplingSeries(hp_name, hp.kind, False, points,
                              bin_edges=[], bin_choices=list(hp.choices), counts=counts)

    lo, hi = float(hp.lower), float(hp.upper)
    raw = np.asarray([float(v) for v in values])
    if hp.log_scale:
        edges_t = np.linspace(math.log(lo), math.log(hi), bins + 1)
        sample_t = np.log(raw) if raw.size else raw
        edges = np.exp(edges_t)
    else:
        edges_t = np.linspace(lo, hi, bins + 1)
        sample_t = raw
        edges = edges_t
    if hi == lo:
        return SamplingSeries(hp_name, hp.kind, hp.log_scale, points,
                              bin_edges=[lo, hi], bin_choices=[],
                              counts=[len(points)])
    counts, _ = np.histogram(sample_t, bins=edges_t)
    return SamplingSeries(hp_name, hp.kind, hp.log_scale, points,
                          bin_edges=[float(e) for e in edges], bin_choices=[],
                          counts=[int(c) for c in counts])
