"""Search-space coverage: how much of the space a run has explored.

Pipeline: merge the run's search spaces, pad configs with defaults, add
artificial boundary candidates, compute pairwise config distances (a
normalized heterogeneous metric weighted by condition-tree depth), project
to 2-D with classical MDS, fit an interpolating kNN performance surface,
and rasterize it to a heatmap. The embedding is computed once over the
whole run and filtered per time-lapse frame so points never move.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .model import (RunHistory, SearchSpace, depth, merge_search_spaces,
                    pad_with_defaults)

__all__ = [
    "BOUNDARY_SKIP_THRESHOLD", "HEATMAP_RESOLUTION", "HEATMAP_PADDING",
    "SURFACE_NEIGHBORS", "merge_search_spaces", "boundary_candidates",
    "distance", "distance_matrix", "embed", "fit_surface", "heatmap",
    "coverage_timelapse", "padded_bounds", "BoundarySet", "Surface", "Heatmap",
    "CoverageEmbedding",
]

BOUNDARY_SKIP_THRESHOLD = 10
HEATMAP_RESOLUTION = 50
HEATMAP_PADDING = 0.05
SURFACE_NEIGHBORS = 5


@dataclass
class BoundarySet:
    configs: list[dict]
    skipped: bool


def boundary_candidates(merged: SearchSpace) -> BoundarySet:
    """Extreme-corner configs: {min, max} per numeric hyperparameter and
    {first, last} choice per categorical one, as a Cartesian product.

    Skipped entirely above BOUNDARY_SKIP_THRESHOLD hyperparameters, where
    the corner count explodes.
    """
    hps = merged.hyperparameters
    if len(hps) > BOUNDARY_SKIP_THRESHOLD:
        return BoundarySet(configs=[], skipped=True)
    pools = []
    for hp in hps:
        if hp.is_numeric:
            pool = [hp.lower, hp.upper] if hp.lower != hp.upper else [hp.lower]
        else:
            pool = [hp.choices[0], hp.choices[-1]]
            if pool[0] == pool[-1]:
                pool = pool[:1]
        pools.append(pool)
    configs = [dict(zip([hp.name for hp in hps], combo))
               for combo in itertools.product(*pools)]
    return BoundarySet(configs=configs, skipped=False)


def _axis_scale(merged: SearchSpace) -> list[tuple[str, bool, float, float, float]]:
    """(name, numeric, lower, span*depth, depth) per hyperparameter."""
    out = []
    for hp in merged.hyperparameters:
        d = float(depth(merged, hp.name))
        if hp.is_numeric:
            span = float(hp.upper - hp.lower)
            out.append((hp.name, True, float(hp.lower), span * d, d))
        else:
            out.append((hp.name, False, 0.0, 0.0, d))
    return out


def distance(config1: Mapping, config2: Mapping, merged: SearchSpace) -> float:
    """Per-coordinate sum of normalized differences, depth-weighted.

    Numeric terms are |v1 - v2| / ((max - min) * depth), zero on degenerate
    axes; categorical terms are an indicator scaled by 1 / depth. Both
    configs must be complete over the merged space (pad first).
    """
    total = 0.0
    for name, numeric, lower, scale, d in _axis_scale(merged):
        try:
            v1, v2 = config1[name], config2[name]
        except KeyError as missing:
            raise ValidationError(
                f"config lacks {missing.args[0]!r}; pad with defaults first") from None
        if numeric:
            if scale > 0:
                total += abs(float(v1) - float(v2)) / scale
        else:
            if v1 != v2:
                total += 1.0 / d
    return total


def distance_matrix(configs: Sequence[Mapping], merged: SearchSpace) -> np.ndarray:
    """Symmetric pairwise distances between complete configs."""
    n = len(configs)
    out = np.zeros((n, n))
    for name, numeric, lower, scale, d in _axis_scale(merged):
        try:
            column = [c[name] for c in configs]
        except KeyError as missing:
            raise ValidationError(
                f"config lacks {missing.args[0]!r}; pad with defaults first") from None
        if numeric:
            if scale <= 0:
                continue
            v = np.asarray([float(x) for x in column]) / scale
            out += np.abs(v[:, None] - v[None, :])
        else:
            codes: dict = {}
            v = np.asarray([codes.setdefault(x, len(codes)) for x in column])
            out += (v[:, None] != v[None, :]) / d
    return out


def embed(dm: np.ndarray) -> np.ndarray:
    """Classical MDS into 2-D: double-center the squared distances and take
    the top two eigenpairs. Reflections are fixed by making the largest-
    magnitude coordinate of each axis positive."""
    dm = np.asarray(dm, dtype=float)
    n = dm.shape[0]
    if dm.ndim != 2 or dm.shape[1] != n:
        raise ValidationError("distance matrix must be square")
    if n == 0:
        return np.zeros((0, 2))
    if n == 1:
        return np.zeros((1, 2))
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (dm ** 2) @ j
    b = (b + b.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(b)
    order = np.argsort(eigenvalues)[::-1][:2]
    coords = np.zeros((n, 2))
    for axis, idx in enumerate(order):
        value = eigenvalues[idx]
        if value > 1e-12:
            coords[:, axis] = eigenvectors[:, idx] * math.sqrt(value)
    for axis in range(2):
        column = coords[:, axis]
        peak = int(np.argmax(np.abs(column)))
        if column[peak] < 0:
            coords[:, axis] = -column
    return coords


@dataclass
class Surface:
    """Inverse-distance-weighted kNN regressor over 2-D points.

    A convex combination of observed values: it interpolates exactly at
    support points and never leaves [min, max] of the observations.
    """

    support: np.ndarray     # (n, 2)
    values: np.ndarray      # (n,)
    k: int

    def predict(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.sqrt(((points[:, None, :] - self.support[None, :, :]) ** 2).sum(axis=2))
        out = np.empty(len(points))
        for i in range(len(points)):
            order = np.argsort(d[i], kind="stable")[:self.k]
            nearest = d[i][order]
            exact = nearest <= 1e-12
            if exact.any():
                out[i] = float(self.values[order][exact].mean())
            else:
                w = 1.0 / nearest
                out[i] = float((w @ self.values[order]) / w.sum())
        return out


def fit_surface(coords: np.ndarray, performances: Sequence[float]) -> Surface:
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(performances, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2 or len(coords) != len(values):
        raise ValidationError("coords must be (n, 2) matching performances")
    if len(values) == 0:
        raise ValidationError("surface needs at least one scored candidate")
    return Surface(support=coords, values=values, k=min(SURFACE_NEIGHBORS, len(values)))


@dataclass
class Heatmap:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: int
    values: np.ndarray  # (resolution, resolution), row-major over y then x

    def to_json(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max,
                "y_min": self.y_min, "y_max": self.y_max,
                "resolution": self.resolution,
                "values": [[float(v) for v in row] for row in self.values]}


def padded_bounds(coords: np.ndarray,
                  padding: float = HEATMAP_PADDING) -> tuple[float, float, float, float]:
    """Bounding box of 2-D coords, padded per side; unit span when degenerate."""
    x_min, y_min = coords.min(axis=0)
    x_max, y_max = coords.max(axis=0)
    bounds = []
    for lo, hi in ((float(x_min), float(x_max)), (float(y_min), float(y_max))):
        span = hi - lo
        if span == 0.0:
            span = 1.0
            lo, hi = lo - 0.5, hi + 0.5
        pad = span * padding
        bounds.append((lo - pad, hi + pad))
    return bounds[0][0], bounds[0][1], bounds[1][0], bounds[1][1]


def heatmap(surface: Surface, coords: np.ndarray,
            resolution: int = HEATMAP_RESOLUTION) -> Heatmap:
    """Surface sampled at the cell centers of a grid over the coords'
    bounding box, padded 5% per side."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2 or len(coords) == 0:
        raise ValidationError("heatmap needs (n, 2) coords with n >= 1")
    x_min, x_max, y_min, y_max = padded_bounds(coords, HEATMAP_PADDING)
    xs = x_min + (np.arange(resolution) + 0.5) * (x_max - x_min) / resolution
    ys = y_min + (np.arange(resolution) + 0.5) * (y_max - y_min) / resolution
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    values = surface.predict(cells).reshape(resolution, resolution)
    return Heatmap(x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max,
                   resolution=resolution, values=values)


@dataclass
class CoveragePoint:
    point_id: str
    x: float
    y: float
    kind: str               # "candidate" | "boundary"
    performance: Optional[float]
    timestamp: Optional[float]

    def to_json(self) -> dict:
        return {"id": self.point_id, "x": self.x, "y": self.y,
                "kind": self.kind, "performance": self.performance,
                "timestamp": self.timestamp}


@dataclass
class CoverageEmbedding:
    points: list[CoveragePoint]
    boundary_skipped: bool
    surface: Optional[Surface]
    heatmap: Optional[Heatmap]
    at: float

    def to_json(self) -> dict:
        return {"at": self.at,
                "boundary_skipped": self.boundary_skipped,
                "points": [p.to_json() for p in self.points],
                "heatmap": self.heatmap.to_json() if self.heatmap else None}


def coverage_timelapse(history: RunHistory, t: float = math.inf) -> CoverageEmbedding:
    """Coverage frame at time t: all candidates are embedded once, then the
    frame shows those with timestamp <= t plus the boundary candidates, with
    the performance surface fitted on the visible scored candidates."""
    if t < 0:
        raise ValidationError("time-lapse position must be >= 0")
    merged = history.merged_space()
    candidates = history.fold_order()
    boundary = boundary_candidates(merged)

    configs = [pad_with_defaults(c.config, merged) for c in candidates]
    configs += boundary.configs
    if not configs:
        return CoverageEmbedding(points=[], boundary_skipped=boundary.skipped,
                                 surface=None, heatmap=None, at=t)
    dm = distance_matrix(configs, merged)
    coords = embed(dm)

    points: list[CoveragePoint] = []
    visible_scored: list[int] = []
    for i, c in enumerate(candidates):
        if c.timestamp > t:
            continue
        points.append(CoveragePoint(
            point_id=c.candidate_id, x=float(coords[i, 0]), y=float(coords[i, 1]),
            kind="candidate", performance=c.validation_performance,
            timestamp=c.timestamp))
        if c.validation_performance is not None:
            visible_scored.append(i)
    for j in range(len(boundary.configs)):
        i = len(candidates) + j
        points.append(CoveragePoint(
            point_id=f"boundary-{j}", x=float(coords[i, 0]), y=float(coords[i, 1]),
            kind="boundary", performance=None, timestamp=None))

    surface = None
    grid = None
    if visible_scored:
        surface = fit_surface(
            coords[visible_scored],
            [candidates[i].validation_performance for i in visible_scored])
        grid = heatmap(surface, coords)
    return CoverageEmbedding(points=points, boundary_skipped=boundary.skipped,
                             surface=surface, heatmap=grid, at=t)
