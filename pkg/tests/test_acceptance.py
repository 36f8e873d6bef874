"""Acceptance gate: one test per shipped guarantee, each checked against an
independent oracle or hand-computed value at its stated tolerance.

Run with -v to get one pass/fail line per criterion.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from oracles import (
    brute_force_assignment,
    grid_variance_decomposition,
    oracle_merge_counts,
)
from runlens import (
    Condition,
    Dataset,
    Hyperparameter,
    RunRegistry,
    SearchSpace,
    distance,
    embed,
    feature_effects,
    global_surrogate,
    hp_importance_from_configs,
    load_run_history,
    local_surrogate,
    partial_dependence,
    simulate_random_search,
    write_run_history,
)
from runlens.cli import main as cli_main
from runlens.engine.metrics import auc, confusion_matrix, precision_recall, roc_auc
from runlens.service import create_app
from runlens.structure import SnapshotCache, assignment_cost, hungarian


def numeric_ds(values: dict[str, list], labels: list[str]) -> Dataset:
    names = list(values)
    return Dataset.from_arrays(
        names=names, kinds=["numeric"] * len(names),
        arrays=[np.array(v, dtype=float) for v in values.values()],
        y_labels=labels)


# ---------------------------------------------------------------------------
# 1. assignment solver vs exhaustive permutation search
# ---------------------------------------------------------------------------

def test_criterion_01_hungarian_matches_brute_force_exactly():
    rng = np.random.default_rng(42)
    elapsed = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        # quarter-integer costs keep every assignment sum exactly
        # representable, so the comparison really is tolerance 0
        matrix = rng.integers(0, 200, size=(n, n)).astype(float) / 4.0
        t0 = time.perf_counter()
        assign = hungarian(matrix)
        elapsed += time.perf_counter() - t0
        oracle_cost, _ = brute_force_assignment(matrix)
        assert assignment_cost(matrix, assign) == oracle_cost
    assert elapsed < 5.0


# ---------------------------------------------------------------------------
# 2. merge-graph golden runs
# ---------------------------------------------------------------------------

def _merge_counts(history):
    snapshots = SnapshotCache(history)
    out = []
    for t in snapshots.frame_times():
        merged = snapshots.at(t)
        out.append({"nodes": len(merged.nodes), "edges": len(merged.edges),
                    "max_path": merged.max_path_length()})
    return out


def _oracle_input(history):
    out = []
    for c in sorted(history.candidates, key=lambda c: c.timestamp):
        p = c.pipeline
        nodes = [(nid, p.node(nid).primitive) for nid in p.topo_order()]
        edges = [(e.src, e.dst, tuple(e.columns) if e.columns else None)
                 for e in p.edges]
        out.append((c.candidate_id, nodes, edges))
    return out


def test_criterion_02_merge_graph_golden_runs(data_dir):
    expected = json.loads((data_dir / "golden_expected.json").read_text())

    for name in ("golden_fixed.json", "golden_template.json",
                 "golden_flexible.json"):
        history = load_run_history(str(data_dir / name))
        counts = _merge_counts(history)
        assert counts == expected[name], name
        assert counts == oracle_merge_counts(_oracle_input(history)), name

    fixed = _merge_counts(load_run_history(str(data_dir / "golden_fixed.json")))
    assert len({tuple(frame.items()) for frame in fixed}) == 1

    template = _merge_counts(
        load_run_history(str(data_dir / "golden_template.json")))
    nodes = [f["nodes"] for f in template]
    assert nodes == sorted(nodes)
    # saturates at the template's algorithm union and stays there
    assert nodes[-1] == 6 and nodes[-3:] == [6, 6, 6]

    flexible = _merge_counts(
        load_run_history(str(data_dir / "golden_flexible.json")))
    paths = [f["max_path"] for f in flexible]
    assert all(b > a for a, b in zip(paths, paths[1:]))


# ---------------------------------------------------------------------------
# 3. config-distance metric properties
# ---------------------------------------------------------------------------

def _conditional_space() -> SearchSpace:
    return SearchSpace(hyperparameters=(
        Hyperparameter("clf:algorithm", "categorical",
                       choices=("tree", "knn"), default="tree"),
        Hyperparameter("clf:max_depth", "numeric-int", lower=1, upper=9,
                       default=3,
                       condition=Condition("clf:algorithm", "tree")),
        Hyperparameter("clf:l2", "numeric-continuous", lower=1e-4, upper=10.0,
                       default=1.0, log_scale=True,
                       condition=Condition("clf:algorithm", "knn")),
        Hyperparameter("prep:scaler", "categorical",
                       choices=("standard", "min-max", "none"),
                       default="standard"),
    ))


def _random_config(space: SearchSpace, rng: np.random.Generator) -> dict:
    config = {}
    for hp in space.hyperparameters:
        if hp.kind == "categorical":
            config[hp.name] = str(rng.choice(list(hp.choices)))
        elif hp.kind == "numeric-int":
            config[hp.name] = int(rng.integers(hp.lower, hp.upper + 1))
        else:
            config[hp.name] = float(rng.uniform(hp.lower, hp.upper))
    return config


def test_criterion_03_distance_metric_properties():
    space = _conditional_space()
    rng = np.random.default_rng(7)
    for _ in range(1000):
        x, y, z = (_random_config(space, rng) for _ in range(3))
        assert distance(x, x, space) == 0.0
        assert distance(x, y, space) == distance(y, x, space)
        assert distance(x, z, space) <= \
            distance(x, y, space) + distance(y, z, space) + 1e-12


# ---------------------------------------------------------------------------
# 4. MDS recovery
# ---------------------------------------------------------------------------

def test_criterion_04_mds_recovers_planar_distances():
    rng = np.random.default_rng(4)
    points = rng.normal(size=(50, 2)) * [2.5, 0.8]
    dm = np.linalg.norm(points[:, None] - points[None, :], axis=-1)
    coords = embed(dm)
    recovered = np.linalg.norm(coords[:, None] - coords[None, :], axis=-1)
    np.testing.assert_allclose(recovered, dm, atol=1e-6)

    triangle = np.array([[0.0, 3.0, 5.0], [3.0, 0.0, 4.0], [5.0, 4.0, 0.0]])
    coords = embed(triangle)
    recovered = np.linalg.norm(coords[:, None] - coords[None, :], axis=-1)
    np.testing.assert_allclose(recovered, triangle, atol=1e-6)


# ---------------------------------------------------------------------------
# 5. hyperparameter importance vs grid decomposition
# ---------------------------------------------------------------------------

def test_criterion_05_importance_isolates_the_active_input():
    space = SearchSpace(hyperparameters=(
        Hyperparameter("a", "numeric-continuous", lower=0.0, upper=1.0,
                       default=0.5),
        Hyperparameter("b", "numeric-continuous", lower=0.0, upper=1.0,
                       default=0.5),
    ))
    for seed in range(5):
        rng = np.random.default_rng(seed)
        configs = [{"a": float(rng.uniform()), "b": float(rng.uniform())}
                   for _ in range(500)]
        values = [math.sin(2 * math.pi * c["a"]) for c in configs]
        table = hp_importance_from_configs(space, configs, values, seed=seed)
        assert table.by_name("a").importance >= 0.8, f"seed {seed}"
        assert table.by_name("b").importance <= 0.1, f"seed {seed}"

    # tree estimate vs dense-grid variance decomposition
    fn = lambda a, b: a + 0.5 * b  # noqa: E731
    rng = np.random.default_rng(17)
    configs = [{"a": float(rng.uniform()), "b": float(rng.uniform())}
               for _ in range(500)]
    values = [fn(c["a"], c["b"]) for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    oracle = grid_variance_decomposition(fn)
    assert abs(table.by_name("a").importance - oracle["a"]) <= 0.1
    assert abs(table.by_name("b").importance - oracle["b"]) <= 0.1


# ---------------------------------------------------------------------------
# 6. explainer oracles
# ---------------------------------------------------------------------------

class _SeparableOracle:
    """P(pos) = sigmoid(x1 - 5); x2 is never read."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        p = 1.0 / (1.0 + np.exp(-(np.asarray(ds.data["x1"], dtype=float) - 5.0)))
        return np.column_stack([1.0 - p, p])


class _StepOracle:
    """pos iff x1 > 5: an in-family target for a depth-1 tree."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        p = (np.asarray(ds.data["x1"], dtype=float) > 5.0).astype(float)
        return np.column_stack([1.0 - p, p])


class _PlaneOracle:
    """P(pos) = sigmoid(3 x1 - 2 x2)."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        z = (3.0 * np.asarray(ds.data["x1"], dtype=float)
             - 2.0 * np.asarray(ds.data["x2"], dtype=float))
        p = 1.0 / (1.0 + np.exp(-z))
        return np.column_stack([1.0 - p, p])


def test_criterion_06_explainer_oracles():
    rng = np.random.default_rng(6)
    x1 = rng.uniform(0.0, 10.0, 200)
    x2 = rng.uniform(0.0, 10.0, 200)
    data = numeric_ds({"x1": list(x1), "x2": list(x2)},
                      ["pos" if v > 5.0 else "neg" for v in x1])

    # permutation importance of a feature the oracle never reads
    fx = feature_effects(_SeparableOracle(), data, seed=0)
    unused = next(e for e in fx.permutation if e["feature"] == "x2")
    assert abs(unused["importance"]) <= 0.01

    # partial dependence of the separable oracle at its decision threshold
    doc = partial_dependence(_SeparableOracle(), data, "x1", [5.0])
    assert doc["pdp"]["pos"][0] == pytest.approx(0.5, abs=0.02)

    # a surrogate fit to an in-family oracle explains it perfectly
    tree = global_surrogate(_StepOracle(), data, max_leaf_nodes=8)
    assert tree.fidelity == 1.0

    # local linear explanations recover the plane's signs, 10/10 seeds
    plane = _PlaneOracle()
    row = int(np.argmax(3.0 * x1 - 2.0 * x2 > 0))  # a positive-class instance
    for seed in range(10):
        explanation = local_surrogate(plane, data, row_index=row,
                                      n_samples=1000, seed=seed)
        assert explanation.explained_class == "pos"
        weights = dict(explanation.weights)
        assert weights["x1"] > 0 and weights["x2"] < 0, f"seed {seed}"


# ---------------------------------------------------------------------------
# 7. hand-computed metrics
# ---------------------------------------------------------------------------

def test_criterion_07_hand_computed_metrics():
    y_true = np.array([0, 1, 1, 0])
    y_pred = np.array([0, 1, 1, 1])
    conf = confusion_matrix(y_true, y_pred, 2)
    assert conf.tolist() == [[1, 1], [0, 2]]
    precision, recall = precision_recall(conf)
    assert precision[0] == 1.0 and recall[0] == 0.5
    assert precision[1] == 2 / 3 and recall[1] == 1.0

    assert roc_auc(np.array([0, 0, 1, 1]),
                   np.array([0.1, 0.6, 0.4, 0.9])) == 0.75
    assert roc_auc(np.array([0, 0, 1, 1]),
                   np.array([0.1, 0.2, 0.8, 0.9])) == 1.0
    assert roc_auc(np.array([0, 1]), np.array([0.5, 0.5])) == 0.5
    assert auc([0.0, 1.0], [0.0, 1.0]) == 0.5


# ---------------------------------------------------------------------------
# 8. determinism and idempotence
# ---------------------------------------------------------------------------

_SWEEP_CID = "c001"

_SWEEP_ANALYSES = [
    (["analyze", "overview"], []),
    (["analyze", "leaderboard"], []),
    (["analyze", "report"], ["--candidate", _SWEEP_CID]),
    (["analyze", "config"], ["--candidate", _SWEEP_CID]),
    (["analyze", "surrogate"], ["--candidate", _SWEEP_CID]),
    (["analyze", "local-surrogate"], ["--candidate", _SWEEP_CID]),
    (["analyze", "effects"], ["--candidate", _SWEEP_CID]),
    (["analyze", "intermediate"],
     ["--candidate", _SWEEP_CID, "--node", "__source__"]),
    (["analyze", "structure-graph"], []),
    (["analyze", "merge-graph"], []),
    (["analyze", "cpc"], []),
    (["analyze", "sampling"], ["--hyperparameter", "classifier:max_depth"]),
    (["analyze", "coverage"], []),
    (["analyze", "hp-importance"], []),
    (["analyze", "ensemble-overview"], []),
    (["analyze", "ensemble-predictions"], []),
    (["analyze", "ensemble-surfaces"], []),
    (["export", "intermediate-dataset"],
     ["--candidate", _SWEEP_CID, "--node", "__source__"]),
    (["export", "surrogate-tree"], ["--candidate", _SWEEP_CID]),
    (["export", "config"], ["--candidate", _SWEEP_CID]),
    (["export", "importance-table"], []),
    (["export", "feature-importance"], ["--candidate", _SWEEP_CID]),
    (["export", "coverage-embedding"], []),
]


def _full_sweep(run_file: Path, out_dir: Path) -> dict[str, bytes]:
    for command, params in _SWEEP_ANALYSES:
        code = cli_main(command + [str(run_file), "--out", str(out_dir),
                                   "--seed", "0"] + params)
        assert code == 0, command
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_criterion_08_sweeps_and_responses_are_byte_identical(sim_history, tmp_path):
    run_file = tmp_path / "golden.json"
    write_run_history(sim_history, str(run_file))

    first = _full_sweep(run_file, tmp_path / "sweep1")
    second = _full_sweep(run_file, tmp_path / "sweep2")
    assert first.keys() == second.keys()
    # the coverage analysis writes its embedding CSV too; the standalone
    # coverage-embedding export lands on the same name with the same bytes
    assert len(first) == len(_SWEEP_ANALYSES)
    assert {"overview.json", "merge-graph.dot",
            "coverage-embedding.csv"} <= first.keys()
    for name in first:
        assert first[name] == second[name], name

    # cache miss and cache hit serve the same bytes
    registry = RunRegistry(seed=0)
    registry.add_file(str(run_file))
    with TestClient(create_app(registry)) as client:
        for path in ("/runs/sim/coverage", "/runs/sim/cpc",
                     "/runs/sim/hp-importance",
                     f"/runs/sim/candidates/{_SWEEP_CID}/surrogate"):
            miss = client.get(path)
            hit = client.get(path)
            assert miss.status_code == hit.status_code == 200
            assert miss.content == hit.content, path


# ---------------------------------------------------------------------------
# 9. end-to-end desk-scale run
# ---------------------------------------------------------------------------

def test_criterion_09_thirty_candidate_run_end_to_end(tmp_path):
    started = time.perf_counter()
    history = simulate_random_search(run_id="e2e", n_candidates=30,
                                     n_rows=500, seed=11)
    assert len(history.candidates) == 30
    assert all(len(c.pipeline.nodes) == 4 for c in history.candidates)
    assert history.dataset.n_rows == 500

    run_file = tmp_path / "e2e.json"
    write_run_history(history, str(run_file))
    registry = RunRegistry(seed=0)
    registry.add_file(str(run_file))

    cid = "c001"
    endpoints = [
        "/", "/runs",
        "/runs/e2e/overview",
        "/runs/e2e/leaderboard",
        f"/runs/e2e/candidates/{cid}/report",
        f"/runs/e2e/candidates/{cid}/config",
        f"/runs/e2e/candidates/{cid}/surrogate",
        f"/runs/e2e/candidates/{cid}/local-surrogate",
        f"/runs/e2e/candidates/{cid}/effects",
        f"/runs/e2e/candidates/{cid}/intermediate/__source__",
        "/runs/e2e/structure-graph",
        "/runs/e2e/structure-graph?at=2",
        "/runs/e2e/cpc",
        "/runs/e2e/sampling/classifier:max_depth",
        "/runs/e2e/coverage",
        "/runs/e2e/coverage?at=2",
        "/runs/e2e/hp-importance",
        "/runs/e2e/ensemble/overview",
        "/runs/e2e/ensemble/predictions",
        "/runs/e2e/ensemble/surfaces",
    ]
    exports = [
        ("intermediate-dataset", {"candidate_id": cid, "node": "__source__"}),
        ("surrogate-tree", {"candidate_id": cid}),
        ("config", {"candidate_id": cid}),
        ("importance-table", {}),
        ("feature-importance", {"candidate_id": cid}),
        ("coverage-embedding", {}),
    ]
    with TestClient(create_app(registry)) as client:
        for path in endpoints:
            response = client.get(path)
            assert response.status_code == 200, path
            assert response.json(), path
        for artifact, params in exports:
            response = client.post("/export", json={
                "run_id": "e2e", "artifact": artifact, "params": params})
            assert response.status_code == 200, artifact
            assert response.content, artifact

    assert time.perf_counter() - started < 60.0
