"""Artifact export: files a user takes away to keep working elsewhere.

Every artifact is a pure function of (run, parameters, seed) and round-trips
through its loader: dataset CSVs reload with ``dataset_from_csv``, surrogate
JSON reloads with ``surrogate_from_json``, config JSON is exactly the
candidate's interchange entries.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Any, Mapping

from .analyses import Param, RunBundle, _as_int, _as_str, normalize_params
from .analyses import MAX_SURROGATE_LEAVES, _as_frame, _frame_time
from .coverage import coverage_timelapse
from .engine.pipeline import transform_until
from .errors import NotFoundError
from .explain import feature_effects, global_surrogate, hp_importance
from .model import dataset_to_csv
from .serialize import canonical_bytes


@dataclass(frozen=True)
class Artifact:
    filename: str
    media_type: str
    content: bytes


def _slug(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", value) or "artifact"


def _csv_bytes(header: list[str], rows: list[list[Any]]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                         for v in row])
    return out.getvalue().encode("utf-8")


def export_intermediate_dataset(bundle: RunBundle, p: dict) -> Artifact:
    cid, node = p["candidate_id"], p["node"]
    data = transform_until(bundle.fitted(cid), node)
    name = f"intermediate-{_slug(cid)}-{_slug(node)}.csv"
    return Artifact(name, "text/csv", dataset_to_csv(data).encode("utf-8"))


def export_surrogate_tree(bundle: RunBundle, p: dict) -> Artifact:
    cid = p["candidate_id"]
    tree = global_surrogate(bundle.fitted(cid), bundle.explainer_data(cid),
                            max_leaf_nodes=p["max_leaf_nodes"])
    return Artifact(f"surrogate-{_slug(cid)}.json", "application/json",
                    canonical_bytes(tree.to_json()))


def export_config(bundle: RunBundle, p: dict) -> Artifact:
    c = bundle.candidate(p["candidate_id"])
    return Artifact(f"config-{_slug(c.candidate_id)}.json", "application/json",
                    canonical_bytes(dict(c.config)))


def export_importance_table(bundle: RunBundle, p: dict) -> Artifact:
    structure_of = p["structure_of"]
    if structure_of is not None:
        bundle.candidate(structure_of)
    table = hp_importance(bundle.history, seed=bundle.seed,
                          structure_of=structure_of)
    rows: list[list[Any]] = []
    for entry in table.singles:
        rows.append(["single", entry.hyperparameters[0], float(entry.importance)])
    for entry in table.pairs:
        rows.append(["pair", ";".join(entry.hyperparameters), float(entry.importance)])
    suffix = "" if structure_of is None else f"-{_slug(structure_of)}"
    return Artifact(f"importance-table{suffix}.csv", "text/csv",
                    _csv_bytes(["kind", "hyperparameters", "importance"], rows))


def export_feature_importance(bundle: RunBundle, p: dict) -> Artifact:
    cid = p["candidate_id"]
    effects = feature_effects(bundle.fitted(cid), bundle.explainer_data(cid),
                              seed=bundle.seed)
    rows = [[e["feature"], float(e["importance"]), float(e["sd"])]
            for e in effects.permutation]
    return Artifact(f"feature-importance-{_slug(cid)}.csv", "text/csv",
                    _csv_bytes(["feature", "importance", "sd"], rows))


def export_coverage_embedding(bundle: RunBundle, p: dict) -> Artifact:
    embedding = coverage_timelapse(bundle.history, _frame_time(p["at"]))
    rows = [[pt.point_id, float(pt.x), float(pt.y), pt.kind,
             None if pt.performance is None else float(pt.performance),
             None if pt.timestamp is None else float(pt.timestamp)]
            for pt in embedding.points]
    suffix = "" if p["at"] is None else f"-at{_slug(str(p['at']))}"
    return Artifact(
        f"coverage-embedding{suffix}.csv", "text/csv",
        _csv_bytes(["point_id", "x", "y", "kind", "performance", "timestamp"], rows))


_CANDIDATE = {"candidate_id": Param(_as_str("candidate_id"), required=True)}

ARTIFACTS: dict[str, tuple] = {
    "intermediate-dataset": (export_intermediate_dataset, {
        **_CANDIDATE, "node": Param(_as_str("node"), required=True)}),
    "surrogate-tree": (export_surrogate_tree, {
        **_CANDIDATE,
        "max_leaf_nodes": Param(_as_int("max_leaf_nodes", 2, MAX_SURROGATE_LEAVES), 8)}),
    "config": (export_config, dict(_CANDIDATE)),
    "importance-table": (export_importance_table, {
        "structure_of": Param(_as_str("structure_of"))}),
    "feature-importance": (export_feature_importance, dict(_CANDIDATE)),
    "coverage-embedding": (export_coverage_embedding, {"at": Param(_as_frame("at"))}),
}


def available_artifacts() -> tuple[str, ...]:
    return tuple(ARTIFACTS)


def export_artifact(bundle: RunBundle, artifact: str,
                    params: Mapping[str, Any]) -> Artifact:
    try:
        handler, schema = ARTIFACTS[artifact]
    except KeyError:
        raise NotFoundError(f"unknown artifact: {artifact!r}")
    parsed = normalize_params(f"export {artifact}", schema, params)
    return handler(bundle, parsed)
