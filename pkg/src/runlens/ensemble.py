"""Ensemble inspection: member table, per-record votes, decision surfaces.

Members are prediction oracles combined by weighted soft voting. Decision
surfaces share a single 2-D PCA basis fitted on the one-hot-encoded data so
the per-member grids stay comparable; grid cells are inverse-transformed to
the feature space and predicted like any other record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .model import Column, Dataset
from .coverage import padded_bounds

SURFACE_RESOLUTION = 64
SURFACE_PADDING = 0.05
WEIGHT_TOLERANCE = 1e-6


@dataclass
class EnsembleMember:
    candidate_id: str
    weight: float
    oracle: Any  # anything with predict_proba(Dataset) -> (n, k) probabilities


@dataclass
class EnsemblePrediction:
    probabilities: np.ndarray
    member_probabilities: dict[str, Optional[np.ndarray]]
    failed: list[str]
    warnings: list[str]

    def labels(self) -> np.ndarray:
        return np.argmax(self.probabilities, axis=1)


def ensemble_predict(members: Sequence[EnsembleMember], data: Dataset) -> EnsemblePrediction:
    """Weighted soft vote over the members' probability outputs.

    A member whose evaluation raises is dropped with a warning and the
    remaining weights renormalize; ties in the final argmax resolve to the
    lower class index.
    """
    if not members:
        raise ValidationError("ensemble has no members")
    total = sum(m.weight for m in members)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise ValidationError(f"member weights sum to {total}, expected 1")

    outputs: dict[str, Optional[np.ndarray]] = {}
    failed: list[str] = []
    warnings: list[str] = []
    for member in members:
        try:
            outputs[member.candidate_id] = np.asarray(
                member.oracle.predict_proba(data), dtype=float)
        except Exception as error:  # noqa: BLE001 - member isolation is the point
            outputs[member.candidate_id] = None
            failed.append(member.candidate_id)
            warnings.append(
                f"member {member.candidate_id} failed ({error}); "
                "weights renormalized over the remaining members")

    alive = [m for m in members if outputs[m.candidate_id] is not None]
    if not alive:
        raise ValidationError("every ensemble member failed to predict")
    weight_sum = sum(m.weight for m in alive)
    combined = sum((m.weight / weight_sum) * outputs[m.candidate_id] for m in alive)
    return EnsemblePrediction(probabilities=combined, member_probabilities=outputs,
                              failed=failed, warnings=warnings)


def prediction_matrix(members: Sequence[EnsembleMember], data: Dataset) -> dict:
    """Per-record predicted labels of every member next to the soft vote."""
    vote = ensemble_predict(members, data)
    labels = data.class_labels
    columns = [m.candidate_id for m in members]
    rows = []
    for i in range(data.n_rows):
        cells = {}
        for cid in columns:
            proba = vote.member_probabilities[cid]
            cells[cid] = None if proba is None else labels[int(np.argmax(proba[i]))]
        rows.append({
            "row": i,
            "true": labels[int(data.y[i])],
            "members": cells,
            "ensemble": labels[int(vote.labels()[i])],
        })
    return {"columns": columns, "rows": rows,
            "failed": vote.failed, "warnings": vote.warnings}


# ---------------------------------------------------------------------------
# decision surfaces
# ---------------------------------------------------------------------------

@dataclass
class _EncodedFeatures:
    matrix: np.ndarray
    # per original column: (name, kind, column index | slice, choices)
    layout: list[tuple[str, str, Any, Optional[tuple[str, ...]]]]


def _one_hot(data: Dataset) -> _EncodedFeatures:
    blocks = []
    layout = []
    j = 0
    for col in data.columns:
        values = data.data[col.name]
        if col.kind == "numeric":
            v = np.asarray(values, dtype=float)
            observed = v[~np.isnan(v)]
            fill = float(observed.mean()) if observed.size else 0.0
            blocks.append(np.where(np.isnan(v), fill, v)[:, None])
            layout.append((col.name, "numeric", j, None))
            j += 1
        else:
            choices = col.vocabulary or ()
            block = np.zeros((data.n_rows, len(choices)))
            for idx, choice in enumerate(choices):
                block[:, idx] = [1.0 if v == choice else 0.0 for v in values]
            blocks.append(block)
            layout.append((col.name, "categorical", slice(j, j + len(choices)), choices))
            j += len(choices)
    if j < 2:
        raise ValidationError(
            "decision surfaces need at least 2 feature dimensions after one-hot encoding")
    return _EncodedFeatures(matrix=np.hstack(blocks), layout=layout)


def _decode(z: np.ndarray, mean: np.ndarray, components: np.ndarray,
            encoded: _EncodedFeatures, template: Dataset) -> Dataset:
    """Grid cells back to the feature space: numerics directly, categoricals
    by the largest one-hot activation."""
    x = mean + z @ components
    data: dict[str, np.ndarray] = {}
    for name, kind, where, choices in encoded.layout:
        if kind == "numeric":
            data[name] = x[:, where]
        else:
            block = x[:, where]
            picks = np.argmax(block, axis=1)
            data[name] = np.array([choices[p] for p in picks], dtype=object)
    return Dataset(columns=template.columns, data=data, target=template.target,
                   class_labels=template.class_labels,
                   y=np.zeros(len(z), dtype=int), column_order=template.column_order)


@dataclass
class DecisionSurfaceSet:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: int
    class_labels: tuple[str, ...]
    mean: np.ndarray
    components: np.ndarray            # (2, p)
    feature_names: list[str]
    points: list[dict]                # embedded records with true labels
    surfaces: list[dict] = field(default_factory=list)  # {"owner", "cells"}
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "x_min": self.x_min, "x_max": self.x_max,
            "y_min": self.y_min, "y_max": self.y_max,
            "resolution": self.resolution,
            "classes": list(self.class_labels),
            "points": self.points,
            "surfaces": self.surfaces,
            "warnings": self.warnings,
        }


def fit_shared_pca(data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray, _EncodedFeatures]:
    """(mean, components (2, p), coords (n, 2)) of the one-hot-encoded data."""
    encoded = _one_hot(data)
    x = encoded.matrix
    mean = x.mean(axis=0)
    centered = x - mean
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s.size == 0 or s[0] <= 1e-12:
        raise DegenerateInputError("decision surface needs data with variance")
    components = np.zeros((2, x.shape[1]))
    take = min(2, vt.shape[0])
    components[:take] = vt[:take]
    for axis in range(take):
        peak = int(np.argmax(np.abs(components[axis])))
        if components[axis][peak] < 0:
            components[axis] = -components[axis]
    coords = centered @ components.T
    return mean, components, coords, encoded


def decision_surface(members: Sequence[EnsembleMember], data: Dataset,
                     resolution: int = SURFACE_RESOLUTION) -> DecisionSurfaceSet:
    """One class-label grid per member plus one for the soft vote, all over
    the same PCA plane of the data."""
    if not members:
        raise ValidationError("ensemble has no members")
    mean, components, coords, encoded = fit_shared_pca(data)
    x_min, x_max, y_min, y_max = padded_bounds(coords, SURFACE_PADDING)
    xs = x_min + (np.arange(resolution) + 0.5) * (x_max - x_min) / resolution
    ys = y_min + (np.arange(resolution) + 0.5) * (y_max - y_min) / resolution
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    grid_data = _decode(cells, mean, components, encoded, data)

    result = DecisionSurfaceSet(
        x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max,
        resolution=resolution, class_labels=data.class_labels,
        mean=mean, components=components,
        feature_names=[c.name for c in data.columns],
        points=[{"x": float(coords[i, 0]), "y": float(coords[i, 1]),
                 "label": data.class_labels[int(data.y[i])]}
                for i in range(data.n_rows)])

    vote = ensemble_predict(members, grid_data)
    for member in members:
        proba = vote.member_probabilities[member.candidate_id]
        if proba is None:
            result.surfaces.append({"owner": member.candidate_id, "cells": None})
            continue
        labels = np.argmax(proba, axis=1).reshape(resolution, resolution)
        result.surfaces.append({"owner": member.candidate_id,
                                "cells": [[int(v) for v in row] for row in labels]})
    ensemble_cells = vote.labels().reshape(resolution, resolution)
    result.surfaces.append({"owner": "ensemble",
                            "cells": [[int(v) for v in row] for row in ensemble_cells]})
    result.warnings = vote.warnings
    return result
