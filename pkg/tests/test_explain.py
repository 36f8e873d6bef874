"""Surrogates, local explanations, hyperparameter importance, and feature
effects, each checked against closed-form oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import grid_variance_decomposition
from runlens import (
    Dataset,
    Hyperparameter,
    InsufficientDataError,
    NotFoundError,
    SearchSpace,
    ValidationError,
    canonical_bytes,
    feature_effects,
    global_surrogate,
    hp_importance,
    hp_importance_from_configs,
    local_surrogate,
    partial_dependence,
    surrogate_from_json,
)


def numeric_ds(values: dict[str, list], labels: list[str]) -> Dataset:
    names = list(values)
    return Dataset.from_arrays(
        names=names, kinds=["numeric"] * len(names),
        arrays=[np.array(v, dtype=float) for v in values.values()],
        y_labels=labels)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


class ThresholdOracle:
    """pos iff x1 > 5: expressible exactly by a one-split tree."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        p = (np.asarray(ds.data["x1"], dtype=float) > 5.0).astype(float)
        return np.column_stack([1.0 - p, p])


class ShiftedSigmoidOracle:
    """P(pos) = sigmoid(x1 - 5); x2 is never read."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        p = sigmoid(np.asarray(ds.data["x1"], dtype=float) - 5.0)
        return np.column_stack([1.0 - p, p])


class PlaneOracle:
    """P(pos) = sigmoid(3 x1 - 2 x2)."""

    class_labels = ("neg", "pos")

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        z = (3.0 * np.asarray(ds.data["x1"], dtype=float)
             - 2.0 * np.asarray(ds.data["x2"], dtype=float))
        p = sigmoid(z)
        return np.column_stack([1.0 - p, p])


@pytest.fixture(scope="module")
def plane_data() -> Dataset:
    rng = np.random.default_rng(12)
    x1 = rng.uniform(0.0, 10.0, 80)
    x2 = rng.uniform(0.0, 10.0, 80)
    labels = ["pos" if v > 5.0 else "neg" for v in x1]
    return numeric_ds({"x1": list(x1), "x2": list(x2)}, labels)


# ---------------------------------------------------------------------------
# global surrogate
# ---------------------------------------------------------------------------

def test_in_family_surrogate_reaches_perfect_fidelity(plane_data):
    tree = global_surrogate(ThresholdOracle(), plane_data, max_leaf_nodes=8)
    assert tree.fidelity == 1.0
    oracle_labels = np.argmax(ThresholdOracle().predict_proba(plane_data), axis=1)
    np.testing.assert_array_equal(tree.predict_labels(plane_data), oracle_labels)


def test_surrogate_respects_the_leaf_budget(plane_data):
    tree = global_surrogate(PlaneOracle(), plane_data, max_leaf_nodes=4)
    assert tree.tree.leaf_count() <= 4
    assert tree.max_leaf_nodes == 4
    assert 0.0 <= tree.fidelity <= 1.0


def test_surrogate_json_round_trip(plane_data):
    tree = global_surrogate(PlaneOracle(), plane_data, max_leaf_nodes=8)
    doc = tree.to_json()
    rebuilt = surrogate_from_json(doc)
    np.testing.assert_array_equal(rebuilt.predict_labels(plane_data),
                                  tree.predict_labels(plane_data))
    assert canonical_bytes(rebuilt.to_json()) == canonical_bytes(doc)


def test_surrogate_handles_categorical_features():
    rng = np.random.default_rng(5)
    color = rng.choice(np.array(["red", "blue", "green"], dtype=object), 60)
    x = rng.uniform(0.0, 1.0, 60)
    labels = ["pos" if c == "red" else "neg" for c in color]
    ds = Dataset.from_arrays(
        names=["x", "color"], kinds=["numeric", "categorical"],
        arrays=[x, color], y_labels=labels)

    class ColorOracle:
        class_labels = ("neg", "pos")

        def predict_proba(self, ds: Dataset) -> np.ndarray:
            p = np.array([1.0 if c == "red" else 0.0 for c in ds.data["color"]])
            return np.column_stack([1.0 - p, p])

    tree = global_surrogate(ColorOracle(), ds, max_leaf_nodes=8)
    assert tree.fidelity == 1.0
    rebuilt = surrogate_from_json(tree.to_json())
    np.testing.assert_array_equal(rebuilt.predict_labels(ds),
                                  tree.predict_labels(ds))


# ---------------------------------------------------------------------------
# local surrogate
# ---------------------------------------------------------------------------

def test_local_surrogate_recovers_plane_signs(plane_data):
    # row 6 sits on the positive side, so the explained class is "pos" and
    # the recovered slopes must carry the plane's signs
    for seed in (0, 1):
        explanation = local_surrogate(PlaneOracle(), plane_data, row_index=6,
                                      n_samples=1000, seed=seed)
        assert explanation.explained_class == "pos"
        weights = dict(explanation.weights)
        assert weights["x1"] > 0
        assert weights["x2"] < 0


def test_local_surrogate_kernel_width(plane_data):
    explanation = local_surrogate(PlaneOracle(), plane_data, row_index=0,
                                  n_samples=400, seed=0)
    assert explanation.kernel_width == pytest.approx(
        0.75 * math.sqrt(len(plane_data.columns)))
    assert explanation.n_samples == 400


def test_local_surrogate_is_deterministic(plane_data):
    e1 = local_surrogate(PlaneOracle(), plane_data, row_index=7, seed=4)
    e2 = local_surrogate(PlaneOracle(), plane_data, row_index=7, seed=4)
    assert e1.weights == e2.weights
    assert e1.intercept == e2.intercept


def test_local_surrogate_tracks_the_instance(plane_data):
    explanation = local_surrogate(PlaneOracle(), plane_data, row_index=2,
                                  n_samples=1500, seed=0)
    target = explanation.instance_probabilities[
        list(PlaneOracle.class_labels).index(explanation.explained_class)]
    assert abs(explanation.local_prediction - target) < 0.25


def test_local_surrogate_input_validation(plane_data):
    with pytest.raises(NotFoundError):
        local_surrogate(PlaneOracle(), plane_data, row_index=80)
    with pytest.raises(ValidationError):
        local_surrogate(PlaneOracle(), plane_data, row_index=0, n_samples=1)


# ---------------------------------------------------------------------------
# hyperparameter importance
# ---------------------------------------------------------------------------

def two_numeric_space() -> SearchSpace:
    return SearchSpace(hyperparameters=(
        Hyperparameter("a", "numeric-continuous", lower=0.0, upper=1.0,
                       default=0.5),
        Hyperparameter("b", "numeric-continuous", lower=0.0, upper=1.0,
                       default=0.5),
    ))


def sampled_configs(n: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    return [{"a": float(rng.uniform()), "b": float(rng.uniform())}
            for _ in range(n)]


def test_importance_isolates_the_only_active_input():
    space = two_numeric_space()
    configs = sampled_configs(150, seed=0)
    values = [math.sin(2 * math.pi * c["a"]) for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    assert table.by_name("a").importance >= 0.8
    assert table.by_name("b").importance <= 0.1
    assert table.singles[0].hyperparameters == ("a",)


def test_importance_matches_grid_decomposition_for_additive_mix():
    space = two_numeric_space()
    configs = sampled_configs(250, seed=3)
    fn = lambda a, b: a + 0.5 * b  # noqa: E731
    values = [fn(c["a"], c["b"]) for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=1)
    oracle = grid_variance_decomposition(fn)
    assert table.by_name("a").importance == pytest.approx(oracle["a"], abs=0.1)
    assert table.by_name("b").importance == pytest.approx(oracle["b"], abs=0.1)


def test_interaction_shows_up_as_pair_importance():
    space = two_numeric_space()
    configs = sampled_configs(300, seed=5)
    values = [1.0 if (c["a"] > 0.5) != (c["b"] > 0.5) else 0.0
              for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    pair = table.by_name("a", "b")
    assert pair.importance >= 0.5
    assert table.by_name("a").importance <= 0.2
    assert table.by_name("b").importance <= 0.2


def test_additive_function_has_no_pair_importance():
    space = two_numeric_space()
    configs = sampled_configs(250, seed=6)
    values = [c["a"] + 0.5 * c["b"] for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    assert table.by_name("a", "b").importance <= 0.05


def test_categorical_marginal_means_are_recovered():
    space = SearchSpace(hyperparameters=(
        Hyperparameter("kind", "categorical", choices=("p", "q", "r"),
                       default="p"),
        Hyperparameter("noise", "numeric-continuous", lower=0.0, upper=1.0,
                       default=0.5),
    ))
    rng = np.random.default_rng(8)
    level = {"p": 0.2, "q": 0.5, "r": 0.9}
    configs = [{"kind": str(rng.choice(["p", "q", "r"])),
                "noise": float(rng.uniform())} for _ in range(240)]
    values = [level[c["kind"]] for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    entry = table.by_name("kind")
    assert entry.importance >= 0.9
    marginal = dict(zip(entry.marginal["grid"], entry.marginal["values"]))
    for choice, expected in level.items():
        assert marginal[choice] == pytest.approx(expected, abs=0.05)


def test_numeric_marginal_axis_has_twenty_points():
    space = two_numeric_space()
    configs = sampled_configs(60, seed=2)
    values = [c["a"] for c in configs]
    table = hp_importance_from_configs(space, configs, values, seed=0)
    marginal = table.by_name("a").marginal
    assert len(marginal["grid"]) == 20
    assert len(marginal["values"]) == 20
    assert marginal["grid"][0] == 0.0 and marginal["grid"][-1] == 1.0


def test_importance_needs_ten_scored_configs():
    space = two_numeric_space()
    configs = sampled_configs(9, seed=0)
    with pytest.raises(InsufficientDataError):
        hp_importance_from_configs(space, configs, [c["a"] for c in configs])


def test_run_level_importance_and_structure_filter(sim_history):
    table = hp_importance(sim_history, seed=0)
    assert table.n_samples == len(sim_history.scored_candidates())
    assert table.n_trees == 16
    names = {e.hyperparameters[0] for e in table.singles}
    assert names == set(sim_history.merged_space().names())
    with pytest.raises(NotFoundError):
        hp_importance(sim_history, structure_of="ghost")


# ---------------------------------------------------------------------------
# feature effects
# ---------------------------------------------------------------------------

def test_unused_feature_has_zero_permutation_importance(plane_data):
    fx = feature_effects(ShiftedSigmoidOracle(), plane_data, seed=0)
    by_feature = {e["feature"]: e for e in fx.permutation}
    assert abs(by_feature["x2"]["importance"]) <= 0.01
    assert by_feature["x1"]["importance"] > 0.1
    # results arrive sorted by importance
    assert fx.permutation[0]["feature"] == "x1"


def test_pdp_is_the_mean_of_ice_exactly(plane_data):
    fx = feature_effects(PlaneOracle(), plane_data, grid_size=8, seed=0)
    effect = next(e for e in fx.effects if e["feature"] == "x1")
    for label in ("neg", "pos"):
        ice = np.array(effect["ice"][label])  # (rows, grid)
        np.testing.assert_allclose(np.array(effect["pdp"][label]),
                                   ice.mean(axis=0), atol=1e-12)


def test_quantile_grid_spans_the_observations(plane_data):
    fx = feature_effects(PlaneOracle(), plane_data, grid_size=10, seed=0)
    effect = next(e for e in fx.effects if e["feature"] == "x1")
    grid = effect["grid"]
    assert len(grid) <= 10
    assert grid == sorted(grid)
    x1 = np.asarray(plane_data.data["x1"], dtype=float)
    assert grid[0] == pytest.approx(x1.min())
    assert grid[-1] == pytest.approx(x1.max())


def test_pdp_of_sigmoid_oracle_crosses_half_at_the_threshold(plane_data):
    doc = partial_dependence(ShiftedSigmoidOracle(), plane_data, "x1", [5.0])
    assert doc["pdp"]["pos"][0] == pytest.approx(0.5, abs=1e-12)


def test_baseline_accuracy_matches_direct_computation(plane_data):
    fx = feature_effects(ThresholdOracle(), plane_data, seed=0)
    proba = ThresholdOracle().predict_proba(plane_data)
    expected = float((np.argmax(proba, axis=1) == plane_data.y).mean())
    assert fx.baseline_accuracy == expected
