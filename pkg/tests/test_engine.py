"""Model zoo behavior: primitive semantics, deterministic refits, and
intermediate dataset extraction."""

from __future__ import annotations

import numpy as np
import pytest

from runlens import (
    Candidate,
    Dataset,
    PipelineEdge,
    PipelineGraph,
    PipelineNode,
    UnsupportedPrimitiveError,
    fit_candidate,
    transform_until,
)
from runlens.engine.pipeline import stratified_split
from runlens.engine.primitives import encode_features, make_primitive


def numeric_ds(values: dict[str, list], labels: list[str]) -> Dataset:
    names = list(values)
    return Dataset.from_arrays(
        names=names,
        kinds=["numeric"] * len(names),
        arrays=[np.array(v, dtype=float) for v in values.values()],
        y_labels=labels,
    )


def candidate(primitives: list[str], config: "dict | None" = None,
              cid: str = "c") -> Candidate:
    ids = [f"s{i}" for i in range(len(primitives))]
    graph = PipelineGraph(
        nodes=tuple(PipelineNode(i, p, i) for i, p in zip(ids, primitives)),
        edges=tuple(PipelineEdge(a, b, None) for a, b in zip(ids, ids[1:])))
    return Candidate(candidate_id=cid, pipeline=graph, config=config or {},
                     timestamp=1.0)


# ---------------------------------------------------------------------------
# primitives in isolation
# ---------------------------------------------------------------------------

def test_mean_imputer_fills_column_mean():
    ds = numeric_ds({"a": [1.0, np.nan, 3.0]}, ["x", "y", "x"])
    out = make_primitive("mean-imputer").fit(ds).transform(ds)
    assert out.data["a"][1] == 2.0
    assert not np.isnan(out.data["a"]).any()


def test_most_frequent_imputer_fills_mode():
    ds = Dataset.from_arrays(
        names=["c"], kinds=["categorical"],
        arrays=[np.array(["red", None, "red", "blue"], dtype=object)],
        y_labels=["x", "y", "x", "y"])
    out = make_primitive("most-frequent-imputer").fit(ds).transform(ds)
    assert list(out.data["c"]) == ["red", "red", "red", "blue"]


def test_standard_scaler_centers_and_scales():
    ds = numeric_ds({"a": [2.0, 4.0, 6.0]}, ["x", "y", "x"])
    out = make_primitive("standard-scaler").fit(ds).transform(ds)
    np.testing.assert_allclose(out.data["a"].mean(), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.data["a"].std(), 1.0, atol=1e-12)


def test_min_max_scaler_maps_to_unit_interval():
    ds = numeric_ds({"a": [5.0, 10.0, 7.5]}, ["x", "y", "x"])
    out = make_primitive("min-max-scaler").fit(ds).transform(ds)
    assert list(out.data["a"]) == [0.0, 1.0, 0.5]


def test_one_hot_encoder_expands_categories():
    ds = Dataset.from_arrays(
        names=["c"], kinds=["categorical"],
        arrays=[np.array(["red", "blue", "red"], dtype=object)],
        y_labels=["x", "y", "x"])
    out = make_primitive("one-hot-encoder").fit(ds).transform(ds)
    assert all(col.kind == "numeric" for col in out.columns)
    matrix = np.column_stack([out.data[n] for n in out.feature_names()])
    np.testing.assert_array_equal(matrix.sum(axis=1), [1.0, 1.0, 1.0])
    assert matrix.shape[1] == 2


def test_unknown_primitive_raises():
    with pytest.raises(UnsupportedPrimitiveError):
        make_primitive("quantum-annealer")


def test_encode_features_is_stable():
    ds = Dataset.from_arrays(
        names=["a", "c"], kinds=["numeric", "categorical"],
        arrays=[np.array([1.0, 2.0]), np.array(["u", "v"], dtype=object)],
        y_labels=["x", "y"])
    m1, names1, kinds1 = encode_features(ds)
    m2, names2, kinds2 = encode_features(ds)
    np.testing.assert_array_equal(m1, m2)
    assert names1 == names2 and kinds1 == kinds2
    assert m1.shape == (2, 2)


# ---------------------------------------------------------------------------
# whole pipelines
# ---------------------------------------------------------------------------

def separable_dataset(n: int = 48) -> Dataset:
    rng = np.random.default_rng(3)
    x1 = rng.uniform(0.0, 10.0, n)
    x2 = rng.uniform(0.0, 10.0, n)
    labels = ["pos" if v > 5.0 else "neg" for v in x1]
    return numeric_ds({"x1": list(x1), "x2": list(x2)}, labels)


def test_depth_one_tree_solves_separable_data():
    ds = separable_dataset()
    c = candidate(["mean-imputer", "decision-tree"],
                  {"s1:max_depth": 1, "s1:algorithm": "decision-tree"})
    fp = fit_candidate(c, ds, seed=0)
    train = fp.train_data()
    assert (fp.predict_labels(train) == train.y).all()


def test_knn_k1_memorizes_training_data():
    ds = separable_dataset()
    c = candidate(["k-nearest-neighbors"],
                  {"s0:n_neighbors": 1, "s0:algorithm": "k-nearest-neighbors"})
    fp = fit_candidate(c, ds, seed=0)
    train = fp.train_data()
    assert (fp.predict_labels(train) == train.y).all()


def test_fit_is_deterministic():
    ds = separable_dataset()
    c = candidate(["standard-scaler", "random-forest"],
                  {"s1:n_trees": 8, "s1:algorithm": "random-forest"})
    p1 = fit_candidate(c, ds, seed=5).predict_proba(ds)
    p2 = fit_candidate(c, ds, seed=5).predict_proba(ds)
    np.testing.assert_array_equal(p1, p2)


def test_seed_changes_split():
    ds = separable_dataset()
    c = candidate(["decision-tree"], {"s0:algorithm": "decision-tree"})
    v1 = fit_candidate(c, ds, seed=1).validation_data()
    v2 = fit_candidate(c, ds, seed=2).validation_data()
    assert list(v1.data["x1"]) != list(v2.data["x1"])


def test_probabilities_are_distributions():
    ds = separable_dataset()
    for clf in ["decision-tree", "random-forest", "k-nearest-neighbors",
                "logistic-regression", "gaussian-naive-bayes"]:
        c = candidate([clf], {f"s0:algorithm": clf})
        proba = fit_candidate(c, ds, seed=0).predict_proba(ds)
        assert proba.shape == (ds.n_rows, 2)
        assert (proba >= 0).all()
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)


def test_unsupported_primitive_fails_at_fit_time():
    ds = separable_dataset()
    c = candidate(["warp-drive", "decision-tree"])
    with pytest.raises(UnsupportedPrimitiveError):
        fit_candidate(c, ds, seed=0)


# ---------------------------------------------------------------------------
# intermediates
# ---------------------------------------------------------------------------

def test_transform_until_source_returns_input(tiny_history):
    c = tiny_history.candidates[0]
    fp = fit_candidate(c, tiny_history.dataset, seed=0)
    src = transform_until(fp, "__source__")
    assert src.n_rows == tiny_history.dataset.n_rows
    np.testing.assert_array_equal(src.y, tiny_history.dataset.y)


def test_transform_until_composes_like_manual_application():
    ds = separable_dataset()
    c = candidate(["mean-imputer", "standard-scaler", "decision-tree"],
                  {"s2:algorithm": "decision-tree"})
    fp = fit_candidate(c, ds, seed=0)
    after_scaler = transform_until(fp, "s1")
    # each step fits on the training split of its input, transforms everything
    train_idx, _ = stratified_split(ds.y, seed=0)
    imputer = make_primitive("mean-imputer").fit(ds.take(train_idx))
    imputed = imputer.transform(ds)
    scaler = make_primitive("standard-scaler").fit(imputed.take(train_idx))
    manual = scaler.transform(imputed)
    np.testing.assert_allclose(after_scaler.data["x1"], manual.data["x1"])


def test_transform_until_classifier_yields_probability_columns():
    ds = separable_dataset()
    c = candidate(["decision-tree"], {"s0:algorithm": "decision-tree"})
    fp = fit_candidate(c, ds, seed=0)
    out = transform_until(fp, "s0")
    assert out.n_rows == ds.n_rows
    matrix = np.column_stack([out.data[n] for n in out.feature_names()])
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-9)


def test_transform_until_unknown_node(tiny_history):
    from runlens import NotFoundError

    c = tiny_history.candidates[0]
    fp = fit_candidate(c, tiny_history.dataset, seed=0)
    with pytest.raises(NotFoundError):
        transform_until(fp, "nope")


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

def test_stratified_split_is_disjoint_and_stratified():
    y = np.array([0] * 40 + [1] * 20)
    train, val = stratified_split(y, seed=0)
    assert set(train) | set(val) == set(range(60))
    assert set(train) & set(val) == set()
    # 75/25 split preserves the 2:1 class ratio on both sides
    assert (y[train] == 0).sum() == 30
    assert (y[val] == 0).sum() == 10
    np.testing.assert_array_equal(train, stratified_split(y, seed=0)[0])
