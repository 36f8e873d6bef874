"""Scripted random-search simulation producing genuine run histories.

Every candidate is a real 4-step pipeline (imputer, one-hot encoder, scaler,
classifier) refit on a seeded synthetic dataset, so performances, durations
and the ensemble are measured, not invented. Demos and the end-to-end tests
build their inputs here.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .engine.pipeline import fit_candidate
from .engine.metrics import accuracy, measure_predict_seconds
from .model import (Candidate, Column, Condition, Dataset, EnsembleSpec,
                    Hyperparameter, PipelineEdge, PipelineGraph, PipelineNode,
                    RunHistory, SearchSpace)

CLASSIFIER_CHOICES = ("decision-tree", "random-forest", "k-nearest-neighbors",
                      "logistic-regression", "gaussian-naive-bayes")
IMPUTER_CHOICES = ("mean-imputer", "most-frequent-imputer")
SCALER_CHOICES = ("standard-scaler", "min-max-scaler")


def synthetic_dataset(n_rows: int = 500, seed: int = 0) -> Dataset:
    """Two informative numeric features, one noise feature, one correlated
    categorical, ~3% missing cells, binary target."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n_rows)
    x1 = rng.normal(loc=np.where(y == 1, 1.6, -1.6), scale=1.0)
    x2 = rng.normal(loc=np.where(y == 1, -1.0, 1.0), scale=1.2)
    x3 = rng.normal(size=n_rows)
    color = np.where(rng.uniform(size=n_rows) < np.where(y == 1, 0.75, 0.25),
                     "red", "blue").astype(object)
    for column in (x1, x2):
        column[rng.uniform(size=n_rows) < 0.03] = math.nan
    color[rng.uniform(size=n_rows) < 0.03] = None
    labels = np.where(y == 1, "yes", "no")
    ds = Dataset.from_arrays(
        ["x1", "x2", "x3", "color"],
        ["numeric", "numeric", "numeric", "categorical"],
        [x1, x2, x3, color], labels, class_labels=("no", "yes"))
    return ds


def simulation_search_space() -> SearchSpace:
    template = PipelineGraph(
        nodes=(PipelineNode("imputer", "mean-imputer", "imputer"),
               PipelineNode("encoder", "one-hot-encoder", "encoder"),
               PipelineNode("scaler", "standard-scaler", "scaler"),
               PipelineNode("classifier", "decision-tree", "classifier")),
        edges=(PipelineEdge("imputer", "encoder", None),
               PipelineEdge("encoder", "scaler", None),
               PipelineEdge("scaler", "classifier", None)))
    hps = (
        Hyperparameter("imputer:algorithm", "categorical",
                       choices=IMPUTER_CHOICES, default="mean-imputer"),
        Hyperparameter("scaler:algorithm", "categorical",
                       choices=SCALER_CHOICES, default="standard-scaler"),
        Hyperparameter("classifier:algorithm", "categorical",
                       choices=CLASSIFIER_CHOICES, default="decision-tree"),
        Hyperparameter("classifier:max_depth", "numeric-integer",
                       lower=1, upper=12, default=6,
                       condition=Condition("classifier:algorithm", "decision-tree")),
        Hyperparameter("classifier:n_trees", "numeric-integer",
                       lower=5, upper=40, default=25,
                       condition=Condition("classifier:algorithm", "random-forest")),
        Hyperparameter("classifier:n_neighbors", "numeric-integer",
                       lower=1, upper=15, default=5,
                       condition=Condition("classifier:algorithm", "k-nearest-neighbors")),
        Hyperparameter("classifier:weights", "categorical",
                       choices=("uniform", "distance"), default="uniform",
                       condition=Condition("classifier:algorithm", "k-nearest-neighbors")),
        Hyperparameter("classifier:l2", "numeric-continuous",
                       lower=1e-4, upper=10.0, default=0.01, log_scale=True,
                       condition=Condition("classifier:algorithm", "logistic-regression")),
    )
    return SearchSpace(hyperparameters=hps, structure_template=template)


def _sample_config(space: SearchSpace, rng: np.random.Generator) -> dict:
    config: dict = {}
    for hp in space.hyperparameters:
        if hp.condition is not None and config.get(hp.condition.parent) != hp.condition.value:
            continue
        if not hp.is_numeric:
            config[hp.name] = str(rng.choice(hp.choices))
        elif hp.kind == "numeric-integer":
            config[hp.name] = int(rng.integers(hp.lower, hp.upper + 1))
        elif hp.log_scale:
            config[hp.name] = float(math.exp(
                rng.uniform(math.log(hp.lower), math.log(hp.upper))))
        else:
            config[hp.name] = float(rng.uniform(hp.lower, hp.upper))
    return config


def _nudge_config(base: dict, space: SearchSpace, rng: np.random.Generator) -> dict:
    """A config in a small ball around ``base``: structural choices kept,
    numeric values jittered by 5% of their span."""
    config: dict = {}
    for hp in space.hyperparameters:
        if hp.name not in base:
            continue
        value = base[hp.name]
        if hp.is_numeric:
            span = float(hp.upper - hp.lower)
            jitter = rng.normal(0.0, 0.05 * span)
            moved = min(float(hp.upper), max(float(hp.lower), float(value) + jitter))
            if hp.kind == "numeric-integer":
                moved = int(round(moved))
            config[hp.name] = moved
        else:
            config[hp.name] = value
    return config


def _pipeline_for(config: dict) -> PipelineGraph:
    return PipelineGraph(
        nodes=(PipelineNode("imputer", config["imputer:algorithm"], "imputer"),
               PipelineNode("encoder", "one-hot-encoder", "encoder"),
               PipelineNode("scaler", config["scaler:algorithm"], "scaler"),
               PipelineNode("classifier", config["classifier:algorithm"], "classifier")),
        edges=(PipelineEdge("imputer", "encoder", None),
               PipelineEdge("encoder", "scaler", None),
               PipelineEdge("scaler", "classifier", None)))


def simulate_random_search(run_id: str = "simulated-random-search",
                           n_candidates: int = 30, n_rows: int = 500,
                           seed: int = 0, converge: bool = False,
                           ensemble_size: int = 3) -> RunHistory:
    """Random search over the 4-step template, one candidate per time step.

    With ``converge=True`` the last 30% of candidates sample a small ball
    around the best config found so far, mimicking an optimizer that has
    settled into a region.
    """
    dataset = synthetic_dataset(n_rows=n_rows, seed=seed)
    space = simulation_search_space()
    rng = np.random.default_rng(seed + 1)

    candidates: list[Candidate] = []
    best: Optional[tuple[float, dict]] = None
    switch = math.ceil(n_candidates * 0.7)
    for i in range(n_candidates):
        if converge and i >= switch and best is not None:
            config = _nudge_config(best[1], space, rng)
        else:
            config = _sample_config(space, rng)
        shell = Candidate(candidate_id=f"c{i + 1:03d}", pipeline=_pipeline_for(config),
                          config=config, timestamp=float(i + 1))
        fitted = fit_candidate(shell, dataset, seed=seed)
        train = fitted.train_data()
        val = fitted.validation_data()
        train_acc = accuracy(train.y, fitted.predict_labels(train))
        val_acc = accuracy(val.y, fitted.predict_labels(val))
        predict_seconds = measure_predict_seconds(fitted, val)
        candidates.append(Candidate(
            candidate_id=shell.candidate_id, pipeline=shell.pipeline,
            config=config, timestamp=shell.timestamp,
            train_performance=float(train_acc),
            validation_performance=float(val_acc),
            fit_duration=float(fitted.fit_seconds),
            predict_duration=float(predict_seconds),
            budget=1.0))
        if best is None or val_acc > best[0]:
            best = (val_acc, config)

    ranked = sorted((c for c in candidates if c.scored),
                    key=lambda c: (-c.validation_performance, c.candidate_id))
    members = ranked[:ensemble_size]
    weights = np.arange(len(members), 0, -1, dtype=float)
    weights /= weights.sum()
    ensemble = EnsembleSpec(members=tuple(
        (c.candidate_id, float(w)) for c, w in zip(members, weights)))

    return RunHistory(run_id=run_id, metric_name="accuracy", task="classification",
                      search_spaces=(space,), candidates=tuple(candidates),
                      dataset=dataset, ensemble=ensemble, dataset_path=None)
