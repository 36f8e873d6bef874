"""The simulated random search used by demos and end-to-end tests."""

from __future__ import annotations

import numpy as np

from runlens import canonical_bytes, serialize_run_history, simulate_random_search, synthetic_dataset


def doc_without_timings(history) -> bytes:
    # fit/predict durations are measured wall time, the only fields a seed
    # does not pin down
    doc = serialize_run_history(history)
    for candidate in doc["candidates"]:
        candidate.pop("fit_duration", None)
        candidate.pop("predict_duration", None)
    return canonical_bytes(doc)


def test_same_seed_reproduces_everything_but_wall_time():
    a = simulate_random_search(run_id="r", n_candidates=6, n_rows=80, seed=3)
    b = simulate_random_search(run_id="r", n_candidates=6, n_rows=80, seed=3)
    assert doc_without_timings(a) == doc_without_timings(b)


def test_different_seeds_differ():
    a = simulate_random_search(run_id="r", n_candidates=6, n_rows=80, seed=3)
    b = simulate_random_search(run_id="r", n_candidates=6, n_rows=80, seed=4)
    assert doc_without_timings(a) != doc_without_timings(b)


def test_simulated_run_is_complete(sim_history):
    assert len(sim_history.candidates) == 12
    assert all(c.scored for c in sim_history.candidates)
    assert sim_history.ensemble is not None
    weights = [w for _, w in sim_history.ensemble.members]
    assert abs(sum(weights) - 1.0) < 1e-9
    timestamps = [c.timestamp for c in sim_history.fold_order()]
    assert timestamps == sorted(timestamps)
    # every config is valid against the declared search space
    space = sim_history.merged_space()
    for c in sim_history.candidates:
        assert set(c.config) <= set(space.names())


def test_ensemble_members_reference_existing_candidates(sim_history):
    ids = {c.candidate_id for c in sim_history.candidates}
    assert all(cid in ids for cid, _ in sim_history.ensemble.members)


def test_synthetic_dataset_shape_and_determinism():
    ds = synthetic_dataset(n_rows=120, seed=9)
    assert ds.n_rows == 120
    assert len(ds.class_labels) >= 2
    again = synthetic_dataset(n_rows=120, seed=9)
    for col in ds.columns:
        a, b = ds.data[col.name], again.data[col.name]
        if col.kind == "numeric":
            np.testing.assert_array_equal(a, b)
        else:
            assert list(a) == list(b)
    np.testing.assert_array_equal(ds.y, again.y)
    # both classes actually occur
    assert len(set(ds.y.tolist())) == len(ds.class_labels)
