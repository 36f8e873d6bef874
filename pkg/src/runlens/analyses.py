"""Analysis registry: every document the service and the CLI can produce.

One module turns a run history into response documents so the HTTP service
and the batch CLI are byte-identical by construction: both render through the
same handlers, the same parameter normalization and the same canonical
encoder.  Fitted pipelines, merge snapshots and axis trees are memoized per
run; rendered responses are cached as bytes.
"""

from __future__ import annotations

import glob
import os
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

import numpy as np

from .cache import AnalysisCache, DEFAULT_CACHE_BYTES, cache_key
from .coverage import coverage_timelapse
from .cpc import CpcAxisTree, build_axes, project, sampling_history
from .engine.metrics import PerformanceReport, accuracy, performance_report
from .engine.pipeline import FittedPipeline, fit_candidate, transform_until
from .ensemble import (EnsembleMember, decision_surface, ensemble_predict,
                       prediction_matrix)
from .errors import NotFoundError, ValidationError
from .explain import (feature_effects, global_surrogate, hp_importance,
                      local_surrogate)
from .model import (Candidate, Dataset, RunHistory, load_run_history,
                    pipeline_doc)
from .serialize import canonical_bytes
from .structure import SnapshotCache

# Explainers and surfaces run on at most this many validation rows, sampled
# stratified by class with the run-level seed.  Metrics always use the full
# validation split.
ROW_CAP = 5000
PREVIEW_ROWS = 50
MAX_PREVIEW_ROWS = 1000
MAX_SURROGATE_LEAVES = 256
MAX_LOCAL_SAMPLES = 20000


def stratified_cap(data: Dataset, cap: int = ROW_CAP, seed: int = 0) -> Dataset:
    """At most ``cap`` rows, class proportions preserved, order kept stable."""
    n = data.n_rows
    if n <= cap:
        return data
    labels = np.asarray(data.y)
    classes = sorted(set(labels.tolist()))
    counts = {c: int(np.sum(labels == c)) for c in classes}
    # Largest-remainder allocation so quotas sum to the cap exactly.
    exact = {c: cap * counts[c] / n for c in classes}
    quota = {c: int(exact[c]) for c in classes}
    leftover = cap - sum(quota.values())
    for c in sorted(classes, key=lambda c: (-(exact[c] - quota[c]), c)):
        if leftover <= 0:
            break
        if quota[c] < counts[c]:
            quota[c] += 1
            leftover -= 1
    rng = np.random.default_rng(seed)
    keep: list[int] = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        take = min(quota[c], idx.size)
        if take:
            keep.extend(rng.choice(idx, size=take, replace=False).tolist())
    keep.sort()
    return data.take(keep)


class RunBundle:
    """One loaded run plus every lazily computed derivative of it."""

    def __init__(self, history: RunHistory, seed: int = 0):
        self.history = history
        self.seed = seed
        self.snapshots = SnapshotCache(history)
        self._space = history.merged_space()
        self._lock = threading.Lock()
        self._fits: dict[str, FittedPipeline] = {}
        self._reports: dict[str, PerformanceReport] = {}
        self._axes: Optional[CpcAxisTree] = None

    @property
    def run_id(self) -> str:
        return self.history.run_id

    @property
    def space(self):
        return self._space

    def candidate(self, candidate_id: str) -> Candidate:
        return self.history.candidate(candidate_id)

    def fitted(self, candidate_id: str) -> FittedPipeline:
        candidate = self.candidate(candidate_id)
        with self._lock:
            fp = self._fits.get(candidate_id)
        if fp is not None:
            return fp
        fp = fit_candidate(candidate, self.history.dataset, seed=self.seed)
        with self._lock:
            return self._fits.setdefault(candidate_id, fp)

    def report(self, candidate_id: str) -> PerformanceReport:
        with self._lock:
            rep = self._reports.get(candidate_id)
        if rep is not None:
            return rep
        rep = performance_report(self.fitted(candidate_id))
        with self._lock:
            return self._reports.setdefault(candidate_id, rep)

    def axes(self) -> CpcAxisTree:
        with self._lock:
            if self._axes is None:
                self._axes = build_axes(self.snapshots.final(), self._space)
            return self._axes

    def explainer_data(self, candidate_id: str) -> Dataset:
        """Validation split of the candidate, row-capped for explainers."""
        fp = self.fitted(candidate_id)
        return stratified_cap(fp.validation_data(), ROW_CAP, self.seed)

    def ensemble_members(self) -> list[EnsembleMember]:
        spec = self.history.ensemble
        if spec is None:
            raise ValidationError("run has no ensemble")
        return [EnsembleMember(cid, weight, self.fitted(cid))
                for cid, weight in spec.members]


# ── parameter schemas ────────────────────────────────────────────────────

@dataclass(frozen=True)
class Param:
    parse: Callable[[Any], Any]
    default: Any = None
    required: bool = False


def _as_str(name: str):
    def parse(value: Any) -> str:
        if not isinstance(value, str) or not value:
            raise ValidationError(f"parameter {name!r} must be a non-empty string")
        return value
    return parse


def _as_int(name: str, lo: int, hi: int):
    def parse(value: Any) -> int:
        try:
            out = int(str(value))
        except (TypeError, ValueError):
            raise ValidationError(f"parameter {name!r} must be an integer")
        if not lo <= out <= hi:
            raise ValidationError(f"parameter {name!r} must be in [{lo}, {hi}]")
        return out
    return parse


def _as_frame(name: str):
    """Time-lapse position: a non-negative number, or None for the final frame."""
    def parse(value: Any) -> Optional[float]:
        if value is None:
            return None
        try:
            out = float(str(value))
        except (TypeError, ValueError):
            raise ValidationError(f"parameter {name!r} must be a number")
        if not np.isfinite(out) or out < 0:
            raise ValidationError(f"parameter {name!r} must be a finite number >= 0")
        return out
    return parse


def normalize_params(operation: str, schema: Mapping[str, Param],
                     raw: Mapping[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(
            f"unknown parameter(s) for {operation}: {', '.join(unknown)}")
    out: dict[str, Any] = {}
    for name, spec in schema.items():
        if name in raw and raw[name] is not None:
            out[name] = spec.parse(raw[name])
        elif spec.required:
            raise ValidationError(f"parameter {name!r} is required for {operation}")
        else:
            out[name] = spec.default
    return out


# ── handlers ─────────────────────────────────────────────────────────────

def _frame_time(at: Optional[float]) -> float:
    return float("inf") if at is None else at


def op_overview(bundle: RunBundle, p: dict) -> dict:
    history = bundle.history
    order = history.fold_order()
    scored = [c for c in order if c.scored]
    best = max(scored, key=lambda c: (c.validation_performance, c.candidate_id),
               default=None)
    timeline = []
    incumbent: Optional[float] = None
    for c in order:
        if c.scored:
            incumbent = c.validation_performance if incumbent is None \
                else max(incumbent, c.validation_performance)
        timeline.append({
            "candidate_id": c.candidate_id,
            "timestamp": c.timestamp,
            "train_performance": c.train_performance,
            "validation_performance": c.validation_performance,
            "incumbent": incumbent,
        })
    ds = history.dataset
    return {
        "run": {"run_id": history.run_id, "metric_name": history.metric_name,
                "task": history.task},
        "n_candidates": len(order),
        "n_scored": len(scored),
        "best": None if best is None else {
            "candidate_id": best.candidate_id,
            "validation_performance": best.validation_performance,
            "timestamp": best.timestamp},
        "dataset": {
            "target": ds.target,
            "n_rows": ds.n_rows,
            "n_features": len(ds.columns),
            "class_labels": list(ds.class_labels),
            "columns": [{"name": c.name, "kind": c.kind} for c in ds.columns]},
        "timeline": timeline,
        "total_fit_duration": sum(c.fit_duration or 0.0 for c in order),
        "ensemble_available": history.ensemble is not None,
    }


def op_leaderboard(bundle: RunBundle, p: dict) -> dict:
    order = bundle.history.fold_order()
    scored = sorted((c for c in order if c.scored),
                    key=lambda c: (-c.validation_performance, c.candidate_id))
    unscored = sorted((c for c in order if not c.scored),
                      key=lambda c: c.candidate_id)
    rows = []
    for rank, c in enumerate(scored + unscored, start=1):
        rows.append({
            "rank": rank,
            "candidate_id": c.candidate_id,
            "timestamp": c.timestamp,
            "train_performance": c.train_performance,
            "validation_performance": c.validation_performance,
            "fit_duration": c.fit_duration,
            "predict_duration": c.predict_duration,
            "budget": c.budget,
            "n_steps": len(c.pipeline.nodes),
            "primitives": [c.pipeline.node(nid).primitive
                           for nid in c.pipeline.topo_order()],
        })
    return {"metric_name": bundle.history.metric_name, "rows": rows}


def op_report(bundle: RunBundle, p: dict) -> dict:
    c = bundle.candidate(p["candidate_id"])
    return {
        "candidate_id": c.candidate_id,
        "timestamp": c.timestamp,
        "budget": c.budget,
        "stored": {
            "train_performance": c.train_performance,
            "validation_performance": c.validation_performance,
            "fit_duration": c.fit_duration,
            "predict_duration": c.predict_duration},
        "pipeline": pipeline_doc(c.pipeline),
        "metrics": bundle.report(c.candidate_id).to_json(),
    }


def op_config(bundle: RunBundle, p: dict) -> dict:
    c = bundle.candidate(p["candidate_id"])
    return {"candidate_id": c.candidate_id, "timestamp": c.timestamp,
            "config": dict(c.config)}


def op_surrogate(bundle: RunBundle, p: dict) -> dict:
    cid = p["candidate_id"]
    tree = global_surrogate(bundle.fitted(cid), bundle.explainer_data(cid),
                            max_leaf_nodes=p["max_leaf_nodes"])
    return {"candidate_id": cid, **tree.to_json()}


def op_local_surrogate(bundle: RunBundle, p: dict) -> dict:
    cid = p["candidate_id"]
    data = bundle.explainer_data(cid)
    row = p["row"]
    if row >= data.n_rows:
        raise ValidationError(
            f"row {row} out of range: explainer data has {data.n_rows} rows")
    explanation = local_surrogate(bundle.fitted(cid), data, row,
                                  n_samples=p["n_samples"], seed=bundle.seed)
    instance = {col.name: data.data[col.name][row] for col in data.columns}
    return {"candidate_id": cid, "instance": instance,
            "true_label": data.class_labels[int(data.y[row])],
            **explanation.to_json()}


def op_effects(bundle: RunBundle, p: dict) -> dict:
    cid = p["candidate_id"]
    effects = feature_effects(bundle.fitted(cid), bundle.explainer_data(cid),
                              seed=bundle.seed)
    return {"candidate_id": cid, **effects.to_json()}


def op_intermediate(bundle: RunBundle, p: dict) -> dict:
    cid = p["candidate_id"]
    data = transform_until(bundle.fitted(cid), p["node"])
    limit = min(p["limit"], data.n_rows)
    return {
        "candidate_id": cid,
        "node": p["node"],
        "n_rows": data.n_rows,
        "columns": [{"name": c.name, "kind": c.kind} for c in data.columns],
        "rows": [[data.data[c.name][i] for c in data.columns]
                 for i in range(limit)],
        "target": {"name": data.target,
                   "values": [data.class_labels[int(i)] for i in data.y[:limit]]},
    }


def op_structure_graph(bundle: RunBundle, p: dict) -> dict:
    merged = bundle.snapshots.at(_frame_time(p["at"]))
    return {"at": p["at"], "frame_times": bundle.snapshots.frame_times(),
            **merged.to_json()}


def op_cpc(bundle: RunBundle, p: dict) -> dict:
    axes = bundle.axes()
    polylines = []
    for c in bundle.history.fold_order():
        doc = project(c, axes).to_json()
        doc["validation_performance"] = c.validation_performance
        polylines.append(doc)
    return {**axes.to_json(), "polylines": polylines}


def op_sampling(bundle: RunBundle, p: dict) -> dict:
    return sampling_history(bundle.history, p["hyperparameter"],
                            bins=p["bins"]).to_json()


def op_coverage(bundle: RunBundle, p: dict) -> dict:
    embedding = coverage_timelapse(bundle.history, _frame_time(p["at"]))
    return {"frame_times": bundle.snapshots.frame_times(),
            **embedding.to_json()}


def op_hp_importance(bundle: RunBundle, p: dict) -> dict:
    structure_of = p["structure_of"]
    if structure_of is not None:
        bundle.candidate(structure_of)  # NotFoundError for unknown ids
    table = hp_importance(bundle.history, seed=bundle.seed,
                          structure_of=structure_of)
    return {"structure_of": structure_of, **table.to_json()}


def op_ensemble_overview(bundle: RunBundle, p: dict) -> dict:
    if bundle.history.ensemble is None:
        return {"available": False}
    members = bundle.ensemble_members()
    data = bundle.fitted(members[0].candidate_id).validation_data()
    rows = []
    for m in members:
        fp = bundle.fitted(m.candidate_id)
        stored = bundle.candidate(m.candidate_id).validation_performance
        rows.append({"candidate_id": m.candidate_id, "weight": m.weight,
                     "stored_validation_performance": stored,
                     "validation_accuracy": accuracy(data.y, fp.predict_labels(data))})
    prediction = ensemble_predict(members, data)
    ensemble_accuracy = accuracy(data.y, prediction.labels())
    return {
        "available": True,
        "members": rows,
        "ensemble_validation_accuracy": ensemble_accuracy,
        "class_labels": list(members[0].oracle.class_labels),
        "warnings": list(prediction.warnings),
    }


def op_ensemble_predictions(bundle: RunBundle, p: dict) -> dict:
    if bundle.history.ensemble is None:
        return {"available": False}
    members = bundle.ensemble_members()
    data = stratified_cap(
        bundle.fitted(members[0].candidate_id).validation_data(),
        ROW_CAP, bundle.seed)
    doc = prediction_matrix(members, data)
    return {"available": True,
            "weights": {m.candidate_id: m.weight for m in members}, **doc}


def op_ensemble_surfaces(bundle: RunBundle, p: dict) -> dict:
    if bundle.history.ensemble is None:
        return {"available": False}
    members = bundle.ensemble_members()
    data = stratified_cap(
        bundle.fitted(members[0].candidate_id).validation_data(),
        ROW_CAP, bundle.seed)
    surfaces = decision_surface(members, data)
    return {"available": True, **surfaces.to_json()}


_CANDIDATE = {"candidate_id": Param(_as_str("candidate_id"), required=True)}

OPERATIONS: dict[str, tuple[Callable[[RunBundle, dict], dict], dict[str, Param]]] = {
    "overview": (op_overview, {}),
    "leaderboard": (op_leaderboard, {}),
    "report": (op_report, dict(_CANDIDATE)),
    "config": (op_config, dict(_CANDIDATE)),
    "surrogate": (op_surrogate, {
        **_CANDIDATE,
        "max_leaf_nodes": Param(_as_int("max_leaf_nodes", 2, MAX_SURROGATE_LEAVES), 8)}),
    "local-surrogate": (op_local_surrogate, {
        **_CANDIDATE,
        "row": Param(_as_int("row", 0, 10**9), 0),
        "n_samples": Param(_as_int("n_samples", 10, MAX_LOCAL_SAMPLES), 1000)}),
    "effects": (op_effects, dict(_CANDIDATE)),
    "intermediate": (op_intermediate, {
        **_CANDIDATE,
        "node": Param(_as_str("node"), required=True),
        "limit": Param(_as_int("limit", 1, MAX_PREVIEW_ROWS), PREVIEW_ROWS)}),
    "structure-graph": (op_structure_graph, {"at": Param(_as_frame("at"))}),
    "cpc": (op_cpc, {}),
    "sampling": (op_sampling, {
        "hyperparameter": Param(_as_str("hyperparameter"), required=True),
        "bins": Param(_as_int("bins", 2, 200), 20)}),
    "coverage": (op_coverage, {"at": Param(_as_frame("at"))}),
    "hp-importance": (op_hp_importance, {"structure_of": Param(_as_str("structure_of"))}),
    "ensemble-overview": (op_ensemble_overview, {}),
    "ensemble-predictions": (op_ensemble_predictions, {}),
    "ensemble-surfaces": (op_ensemble_surfaces, {}),
}


def available_operations() -> tuple[str, ...]:
    return tuple(OPERATIONS)


def render(bundle: RunBundle, operation: str, params: Mapping[str, Any],
           cache: Optional[AnalysisCache] = None) -> bytes:
    """Canonical response bytes for one analysis, optionally cached."""
    try:
        handler, schema = OPERATIONS[operation]
    except KeyError:
        raise NotFoundError(f"unknown operation: {operation!r}")
    parsed = normalize_params(operation, schema, params)
    if cache is None:
        return canonical_bytes(handler(bundle, parsed))
    key = cache_key(bundle.run_id, operation, **parsed)
    return cache.get_or_compute(
        key, lambda: canonical_bytes(handler(bundle, parsed)))


class RunRegistry:
    """The set of runs a service (or CLI invocation) can answer for."""

    def __init__(self, seed: int = 0, cache_bytes: int = DEFAULT_CACHE_BYTES):
        self.seed = seed
        self.cache = AnalysisCache(cache_bytes)
        self._bundles: dict[str, RunBundle] = {}

    def add_history(self, history: RunHistory) -> RunBundle:
        if history.run_id in self._bundles:
            raise ValidationError(f"duplicate run id: {history.run_id!r}")
        bundle = RunBundle(history, seed=self.seed)
        self._bundles[history.run_id] = bundle
        return bundle

    def add_file(self, path: str) -> RunBundle:
        return self.add_history(load_run_history(path))

    def add_directory(self, directory: str) -> list[RunBundle]:
        paths = sorted(glob.glob(os.path.join(directory, "*.json")))
        if not paths:
            raise ValidationError(f"no run files (*.json) in {directory!r}")
        return [self.add_file(p) for p in paths]

    def run_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._bundles))

    def bundle(self, run_id: str) -> RunBundle:
        try:
            return self._bundles[run_id]
        except KeyError:
            raise NotFoundError(f"unknown run: {run_id!r}")

    def runs_doc(self) -> dict:
        rows = []
        for run_id in self.run_ids():
            h = self._bundles[run_id].history
            rows.append({
                "run_id": run_id,
                "metric_name": h.metric_name,
                "task": h.task,
                "n_candidates": len(h.candidates),
                "n_scored": len(h.scored_candidates()),
                "ensemble_available": h.ensemble is not None})
        return {"runs": rows}

    def render(self, run_id: str, operation: str,
               params: Mapping[str, Any]) -> bytes:
        return render(self.bundle(run_id), operation, params, self.cache)
