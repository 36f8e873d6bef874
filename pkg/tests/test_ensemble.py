"""Soft voting, the per-record prediction matrix, and shared-PCA decision
surfaces."""

from __future__ import annotations

import numpy as np
import pytest

from runlens import (
    Dataset,
    DegenerateInputError,
    EnsembleMember,
    ValidationError,
    decision_surface,
    ensemble_predict,
    prediction_matrix,
)
from runlens.ensemble import fit_shared_pca


def numeric_ds(values: dict[str, list], labels: list[str]) -> Dataset:
    names = list(values)
    return Dataset.from_arrays(
        names=names, kinds=["numeric"] * len(names),
        arrays=[np.array(v, dtype=float) for v in values.values()],
        y_labels=labels)


class FixedOracle:
    """Returns the same probability matrix regardless of input."""

    def __init__(self, proba):
        self.proba = np.asarray(proba, dtype=float)

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        return np.tile(self.proba, (ds.n_rows, 1))


class BrokenOracle:
    def predict_proba(self, ds: Dataset) -> np.ndarray:
        raise RuntimeError("member broke")


class SplitOracle:
    """pos iff x1 > threshold."""

    def __init__(self, threshold: float = 0.0):
        self.threshold = threshold

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        p = (np.asarray(ds.data["x1"], dtype=float) > self.threshold).astype(float)
        return np.column_stack([1.0 - p, p])


@pytest.fixture()
def four_rows() -> Dataset:
    return numeric_ds({"x1": [-2.0, -1.0, 1.0, 2.0], "x2": [0.0, 1.0, 0.0, 1.0]},
                      ["neg", "neg", "pos", "pos"])


# ---------------------------------------------------------------------------
# soft voting
# ---------------------------------------------------------------------------

def test_weights_must_sum_to_one(four_rows):
    members = [EnsembleMember("a", 0.5, FixedOracle([0.5, 0.5])),
               EnsembleMember("b", 0.6, FixedOracle([0.5, 0.5]))]
    with pytest.raises(ValidationError):
        ensemble_predict(members, four_rows)
    with pytest.raises(ValidationError):
        ensemble_predict([], four_rows)


def test_single_member_vote_is_the_member(four_rows):
    member = EnsembleMember("solo", 1.0, SplitOracle())
    vote = ensemble_predict([member], four_rows)
    np.testing.assert_array_equal(vote.probabilities,
                                  SplitOracle().predict_proba(four_rows))
    assert vote.failed == [] and vote.warnings == []


def test_weighted_mix_is_exact(four_rows):
    members = [EnsembleMember("a", 0.25, FixedOracle([0.8, 0.2])),
               EnsembleMember("b", 0.75, FixedOracle([0.2, 0.8]))]
    vote = ensemble_predict(members, four_rows)
    np.testing.assert_allclose(vote.probabilities[0], [0.35, 0.65], atol=1e-12)
    assert vote.probabilities.shape == (4, 2)


def test_tie_breaks_toward_the_lower_class_index(four_rows):
    members = [EnsembleMember("a", 0.5, FixedOracle([1.0, 0.0])),
               EnsembleMember("b", 0.5, FixedOracle([0.0, 1.0]))]
    vote = ensemble_predict(members, four_rows)
    np.testing.assert_allclose(vote.probabilities, 0.5)
    assert set(vote.labels()) == {0}


def test_failing_member_is_dropped_and_weights_renormalize(four_rows):
    members = [EnsembleMember("a", 0.5, FixedOracle([0.8, 0.2])),
               EnsembleMember("bad", 0.3, BrokenOracle()),
               EnsembleMember("c", 0.2, FixedOracle([0.1, 0.9]))]
    vote = ensemble_predict(members, four_rows)
    assert vote.failed == ["bad"]
    assert len(vote.warnings) == 1 and "weights renormalized" in vote.warnings[0]
    assert vote.member_probabilities["bad"] is None
    expected = (0.5 * np.array([0.8, 0.2]) + 0.2 * np.array([0.1, 0.9])) / 0.7
    np.testing.assert_allclose(vote.probabilities[0], expected, atol=1e-12)


def test_all_members_failing_is_an_error(four_rows):
    members = [EnsembleMember("a", 0.4, BrokenOracle()),
               EnsembleMember("b", 0.6, BrokenOracle())]
    with pytest.raises(ValidationError, match="every ensemble member failed"):
        ensemble_predict(members, four_rows)


def test_vote_rows_stay_probability_distributions(four_rows):
    members = [EnsembleMember("a", 1 / 3, SplitOracle(-1.5)),
               EnsembleMember("b", 1 / 3, SplitOracle(0.0)),
               EnsembleMember("c", 1 / 3, SplitOracle(1.5))]
    vote = ensemble_predict(members, four_rows)
    np.testing.assert_allclose(vote.probabilities.sum(axis=1), 1.0, atol=1e-12)
    assert vote.probabilities.min() >= 0.0


# ---------------------------------------------------------------------------
# prediction matrix
# ---------------------------------------------------------------------------

def test_prediction_matrix_decodes_labels(four_rows):
    members = [EnsembleMember("a", 0.7, SplitOracle()),
               EnsembleMember("b", 0.3, FixedOracle([0.9, 0.1]))]
    doc = prediction_matrix(members, four_rows)
    assert doc["columns"] == ["a", "b"]
    assert len(doc["rows"]) == 4
    first = doc["rows"][0]
    assert first["row"] == 0
    assert first["true"] == "neg"
    assert first["members"] == {"a": "neg", "b": "neg"}
    assert first["ensemble"] == "neg"
    last = doc["rows"][-1]
    assert last["members"]["a"] == "pos" and last["members"]["b"] == "neg"
    # 0.7 * pos beats 0.3 * neg
    assert last["ensemble"] == "pos"


def test_prediction_matrix_marks_failed_members(four_rows):
    members = [EnsembleMember("a", 0.5, SplitOracle()),
               EnsembleMember("bad", 0.5, BrokenOracle())]
    doc = prediction_matrix(members, four_rows)
    assert doc["failed"] == ["bad"]
    assert all(row["members"]["bad"] is None for row in doc["rows"])
    assert all(row["members"]["a"] is not None for row in doc["rows"])


# ---------------------------------------------------------------------------
# shared PCA and decision surfaces
# ---------------------------------------------------------------------------

def test_shared_pca_preserves_planar_distances():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(30, 2)) * [3.0, 1.0]
    ds = numeric_ds({"x1": list(pts[:, 0]), "x2": list(pts[:, 1])},
                    ["pos" if v > 0 else "neg" for v in pts[:, 0]])
    _, components, coords, _ = fit_shared_pca(ds)
    original = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    embedded = np.linalg.norm(coords[:, None] - coords[None, :], axis=-1)
    np.testing.assert_allclose(embedded, original, atol=1e-9)
    # deterministic orientation: each axis peaks positive
    for axis in components:
        assert axis[np.argmax(np.abs(axis))] >= 0


def test_shared_pca_rejects_constant_data():
    ds = numeric_ds({"x1": [1.0] * 5, "x2": [2.0] * 5},
                    ["pos", "neg", "pos", "neg", "pos"])
    with pytest.raises(DegenerateInputError):
        fit_shared_pca(ds)


def test_surface_needs_two_encoded_dimensions():
    ds = numeric_ds({"x1": [0.0, 1.0, 2.0, 3.0]}, ["neg", "neg", "pos", "pos"])
    with pytest.raises(ValidationError, match="2 feature dimensions"):
        decision_surface([EnsembleMember("a", 1.0, SplitOracle())], ds)


def test_decision_surface_shape_and_owners(four_rows):
    members = [EnsembleMember("a", 0.6, SplitOracle()),
               EnsembleMember("b", 0.4, SplitOracle(0.5))]
    surf = decision_surface(members, four_rows)
    assert surf.resolution == 64
    assert [s["owner"] for s in surf.surfaces] == ["a", "b", "ensemble"]
    for s in surf.surfaces:
        cells = s["cells"]
        assert len(cells) == 64 and all(len(row) == 64 for row in cells)
        assert set(v for row in cells for v in row) <= {0, 1}
    assert len(surf.points) == 4
    assert {p["label"] for p in surf.points} == {"neg", "pos"}
    assert surf.x_min < surf.x_max and surf.y_min < surf.y_max


def test_identical_members_draw_identical_surfaces(four_rows):
    members = [EnsembleMember("a", 0.5, SplitOracle()),
               EnsembleMember("b", 0.5, SplitOracle())]
    surf = decision_surface(members, four_rows, resolution=16)
    a, b, vote = surf.surfaces
    assert a["cells"] == b["cells"] == vote["cells"]


def test_split_member_paints_two_regions(four_rows):
    surf = decision_surface([EnsembleMember("a", 1.0, SplitOracle())],
                            four_rows, resolution=32)
    cells = np.array(surf.surfaces[0]["cells"])
    assert set(np.unique(cells)) == {0, 1}


def test_failed_member_surface_is_null(four_rows):
    members = [EnsembleMember("a", 0.5, SplitOracle()),
               EnsembleMember("bad", 0.5, BrokenOracle())]
    surf = decision_surface(members, four_rows, resolution=8)
    by_owner = {s["owner"]: s["cells"] for s in surf.surfaces}
    assert by_owner["bad"] is None
    assert by_owner["a"] is not None and by_owner["ensemble"] is not None
    assert any("weights renormalized" in w for w in surf.warnings)


def test_surface_json_is_plain_data(four_rows):
    surf = decision_surface([EnsembleMember("a", 1.0, SplitOracle())],
                            four_rows, resolution=8)
    doc = surf.to_json()
    assert doc["resolution"] == 8
    assert doc["classes"] == ["neg", "pos"]
    assert len(doc["surfaces"]) == 2
    assert all(isinstance(v, int) for v in doc["surfaces"][0]["cells"][0])


def test_categorical_columns_get_one_hot_lanes():
    ds = Dataset.from_arrays(
        names=["x1", "color"], kinds=["numeric", "categorical"],
        arrays=[np.array([0.0, 1.0, 2.0, 3.0]),
                np.array(["r", "g", "r", "g"], dtype=object)],
        y_labels=["neg", "neg", "pos", "pos"])
    surf = decision_surface([EnsembleMember("a", 1.0, SplitOracle())],
                            ds, resolution=8)
    assert len(surf.points) == 4
    assert surf.surfaces[-1]["owner"] == "ensemble"
