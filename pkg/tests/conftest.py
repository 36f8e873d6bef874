"""Shared fixtures: the hand-written tiny run, the golden runs, and one
simulated run that is expensive enough to fit only once per session."""

from __future__ import annotations

import pathlib

import pytest

from runlens import RunRegistry, load_run_history, simulate_random_search

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def tiny_history():
    return load_run_history(DATA_DIR / "tiny_run.json")


@pytest.fixture(scope="session")
def sim_history():
    # 12 candidates keep every analysis above its minimum sample count
    # without dominating the suite's runtime.
    return simulate_random_search(run_id="sim", n_candidates=12, n_rows=200,
                                  seed=7, ensemble_size=3)


@pytest.fixture(scope="session")
def sim_registry(sim_history):
    registry = RunRegistry(seed=7)
    registry.add_history(sim_history)
    return registry


@pytest.fixture(scope="session")
def tiny_registry(tiny_history):
    registry = RunRegistry(seed=0)
    registry.add_history(tiny_history)
    return registry
