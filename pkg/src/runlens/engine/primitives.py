"""The built-in primitive zoo: deterministic transformers and classifiers.

Every primitive is fit from scratch on the training split with a fixed seed,
so refitting a candidate always reproduces the same model bit for bit.
Numeric-only primitives reject categorical or missing input with a clear
error instead of guessing; imputers and the one-hot encoder are the supported
ways to fix such data inside a pipeline.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Mapping, Optional

import numpy as np

from ..errors import UnsupportedPrimitiveError, ValidationError
from ..model import Column, Dataset
from .trees import CAT, NUM, Forest, fit_forest, fit_tree, predict_tree


# ---------------------------------------------------------------------------
# feature encoding shared by classifiers
# ---------------------------------------------------------------------------

def encode_features(ds: Dataset) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...]]:
    """Dataset features as one float matrix.

    Numeric columns keep their values; categorical columns become vocabulary
    codes. NaN marks missing cells and values outside the fit vocabulary.
    """
    n = ds.n_rows
    X = np.empty((n, len(ds.columns)), dtype=float)
    kinds = []
    for j, col in enumerate(ds.columns):
        if col.kind == "numeric":
            X[:, j] = np.asarray(ds.data[col.name], dtype=float)
            kinds.append(NUM)
        else:
            lut = {v: float(i) for i, v in enumerate(col.vocabulary or ())}
            X[:, j] = [lut.get(v, math.nan) if v is not None else math.nan
                       for v in ds.data[col.name]]
            kinds.append(CAT)
    return X, tuple(kinds), ds.feature_names()


def _require_numeric(ds: Dataset, who: str) -> None:
    bad = [c.name for c in ds.columns if c.kind != "numeric"]
    if bad:
        raise ValidationError(
            f"{who} requires numeric input; categorical columns remain: {bad} "
            "(add a one-hot-encoder step)")


def _require_complete(ds: Dataset, who: str) -> None:
    bad = [c.name for c in ds.columns
           if c.kind == "numeric" and np.isnan(np.asarray(ds.data[c.name], dtype=float)).any()]
    bad += [c.name for c in ds.columns
            if c.kind == "categorical" and any(v is None for v in ds.data[c.name])]
    if bad:
        raise ValidationError(
            f"{who} cannot handle missing values in columns {bad} (add an imputer step)")


def _numeric_matrix(ds: Dataset, who: str) -> np.ndarray:
    _require_numeric(ds, who)
    _require_complete(ds, who)
    X, _, _ = encode_features(ds)
    return X


# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------

def _as_int(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not float(v).is_integer():
        raise ValidationError(f"expected an integer, got {v!r}")
    return int(v)


def _as_float(v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"expected a number, got {v!r}")
    return float(v)


def _as_choice(*options: str) -> Callable[[Any], str]:
    def cast(v: Any) -> str:
        if v not in options:
            raise ValidationError(f"expected one of {options}, got {v!r}")
        return v
    return cast


class Primitive:
    """Base: validates params against the class's PARAMS table."""

    name = ""
    PARAMS: dict[str, Callable[[Any], Any]] = {}

    def __init__(self, params: Optional[Mapping[str, Any]] = None, seed: int = 0):
        params = dict(params or {})
        unknown = sorted(set(params) - set(self.PARAMS))
        if unknown:
            raise ValidationError(f"{self.name}: unknown hyperparameters {unknown}")
        self.params: dict[str, Any] = {}
        for key, cast in self.PARAMS.items():
            if key in params:
                try:
                    self.params[key] = cast(params[key])
                except ValidationError as exc:
                    raise ValidationError(f"{self.name}.{key}: {exc}")
        self.seed = seed


# ---------------------------------------------------------------------------
# transformers
# ---------------------------------------------------------------------------

class MeanImputer(Primitive):
    name = "mean-imputer"

    def fit(self, ds: Dataset) -> "MeanImputer":
        self.fill: dict[str, Any] = {}
        for col in ds.columns:
            if col.kind == "numeric":
                v = np.asarray(ds.data[col.name], dtype=float)
                obs = v[~np.isnan(v)]
                if obs.size == 0:
                    raise ValidationError(f"{self.name}: column {col.name!r} is entirely missing")
                self.fill[col.name] = float(obs.mean())
            else:
                self.fill[col.name] = _most_frequent_categorical(ds, col)
        return self

    def transform(self, ds: Dataset) -> Dataset:
        return _apply_fill(ds, self.fill)


class MostFrequentImputer(Primitive):
    name = "most-frequent-imputer"

    def fit(self, ds: Dataset) -> "MostFrequentImputer":
        self.fill = {}
        for col in ds.columns:
            if col.kind == "numeric":
                v = np.asarray(ds.data[col.name], dtype=float)
                obs = v[~np.isnan(v)]
                if obs.size == 0:
                    raise ValidationError(f"{self.name}: column {col.name!r} is entirely missing")
                values, counts = np.unique(obs, return_counts=True)
                self.fill[col.name] = float(values[np.argmax(counts)])  # ties: smallest value
            else:
                self.fill[col.name] = _most_frequent_categorical(ds, col)
        return self

    def transform(self, ds: Dataset) -> Dataset:
        return _apply_fill(ds, self.fill)


def _most_frequent_categorical(ds: Dataset, col: Column) -> str:
    obs = [v for v in ds.data[col.name] if v is not None]
    if not obs:
        raise ValidationError(f"column {col.name!r} is entirely missing")
    values, counts = np.unique(np.array(obs, dtype=object), return_counts=True)
    return str(values[np.argmax(counts)])  # ties: lexicographically smallest


def _apply_fill(ds: Dataset, fill: Mapping[str, Any]) -> Dataset:
    data = {}
    for col in ds.columns:
        v = ds.data[col.name]
        if col.kind == "numeric":
            v = np.asarray(v, dtype=float)
            out = np.where(np.isnan(v), fill[col.name], v)
        else:
            out = np.array([fill[col.name] if x is None else x for x in v], dtype=object)
        data[col.name] = out
    columns = [c if c.kind == "numeric" or fill[c.name] in (c.vocabulary or ())
               else Column(c.name, c.kind, tuple(sorted(set(c.vocabulary or ()) | {fill[c.name]})))
               for c in ds.columns]
    return ds.with_features(columns, data)


class StandardScaler(Primitive):
    name = "standard-scaler"

    def fit(self, ds: Dataset) -> "StandardScaler":
        self.stats = {}
        for name in ds.numeric_names():
            v = np.asarray(ds.data[name], dtype=float)
            obs = v[~np.isnan(v)]
            mean = float(obs.mean()) if obs.size else 0.0
            sd = float(obs.std()) if obs.size else 0.0
            self.stats[name] = (mean, sd if sd > 0 else 1.0)
        return self

    def transform(self, ds: Dataset) -> Dataset:
        data = dict(ds.data)
        for name, (mean, sd) in self.stats.items():
            if name in data:
                data[name] = (np.asarray(data[name], dtype=float) - mean) / sd
        return ds.with_features(ds.columns, data)


class MinMaxScaler(Primitive):
    name = "min-max-scaler"

    def fit(self, ds: Dataset) -> "MinMaxScaler":
        self.stats = {}
        for name in ds.numeric_names():
            v = np.asarray(ds.data[name], dtype=float)
            obs = v[~np.isnan(v)]
            lo = float(obs.min()) if obs.size else 0.0
            hi = float(obs.max()) if obs.size else 0.0
            self.stats[name] = (lo, (hi - lo) if hi > lo else 1.0)
        return self

    def transform(self, ds: Dataset) -> Dataset:
        data = dict(ds.data)
        for name, (lo, span) in self.stats.items():
            if name in data:
                data[name] = (np.asarray(data[name], dtype=float) - lo) / span
        return ds.with_features(ds.columns, data)


class OneHotEncoder(Primitive):
    name = "one-hot-encoder"

    def fit(self, ds: Dataset) -> "OneHotEncoder":
        self.vocab = {c.name: tuple(c.vocabulary or ())
                      for c in ds.columns if c.kind == "categorical"}
        return self

    def transform(self, ds: Dataset) -> Dataset:
        columns: list[Column] = []
        data: dict[str, np.ndarray] = {}
        for col in ds.columns:
            if col.name not in self.vocab:
                columns.append(col)
                data[col.name] = ds.data[col.name]
                continue
            values = ds.data[col.name]
            for choice in self.vocab[col.name]:
                out_name = f"{col.name}={choice}"
                data[out_name] = np.array([1.0 if v == choice else 0.0 for v in values])
                columns.append(Column(out_name, "numeric"))
        return ds.with_features(columns, data)


class Pca(Primitive):
    name = "pca"
    PARAMS = {"n_components": _as_int}

    def fit(self, ds: Dataset) -> "Pca":
        X = _numeric_matrix(ds, self.name)
        k = self.params.get("n_components", 2)
        if k < 1:
            raise ValidationError(f"{self.name}: n_components must be positive")
        k = min(k, X.shape[1], X.shape[0])
        self.mean = X.mean(axis=0)
        _, _, vt = np.linalg.svd(X - self.mean, full_matrices=False)
        components = vt[:k]
        for i in range(components.shape[0]):  # sign convention: largest loading positive
            j = int(np.argmax(np.abs(components[i])))
            if components[i, j] < 0:
                components[i] = -components[i]
        self.components = components
        return self

    def transform(self, ds: Dataset) -> Dataset:
        X = _numeric_matrix(ds, self.name)
        if X.shape[1] != self.mean.shape[0]:
            raise ValidationError(f"{self.name}: column count changed between fit and transform")
        Z = (X - self.mean) @ self.components.T
        columns = [Column(f"pc{i + 1}", "numeric") for i in range(Z.shape[1])]
        return ds.with_features(columns, {c.name: Z[:, i] for i, c in enumerate(columns)})


# ---------------------------------------------------------------------------
# classifiers
# ---------------------------------------------------------------------------

class DecisionTreeClassifier(Primitive):
    name = "decision-tree"
    PARAMS = {"max_depth": _as_int, "min_samples_split": _as_int,
              "min_samples_leaf": _as_int}

    def fit(self, ds: Dataset) -> "DecisionTreeClassifier":
        X, kinds, _ = encode_features(ds)
        self.n_classes = len(ds.class_labels)
        self.tree = fit_tree(
            X, kinds, ds.y, task="classify", n_classes=self.n_classes,
            max_depth=self.params.get("max_depth"),
            min_samples_split=self.params.get("min_samples_split", 2),
            min_samples_leaf=self.params.get("min_samples_leaf", 1))
        self.fit_columns = ds.feature_names()
        return self

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        X, _, _ = encode_features(ds)
        return predict_tree(self.tree, X)


class RandomForestClassifier(Primitive):
    name = "random-forest"
    PARAMS = {"n_trees": _as_int, "max_depth": _as_int, "min_samples_leaf": _as_int}

    def fit(self, ds: Dataset) -> "RandomForestClassifier":
        X, kinds, _ = encode_features(ds)
        self.n_classes = len(ds.class_labels)
        p = X.shape[1]
        self.forest = fit_forest(
            X, kinds, ds.y, task="classify", n_classes=self.n_classes,
            n_trees=self.params.get("n_trees", 25),
            max_depth=self.params.get("max_depth"),
            min_samples_leaf=self.params.get("min_samples_leaf", 1),
            max_features=max(1, int(round(math.sqrt(p)))),
            seed=self.seed)
        return self

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        X, _, _ = encode_features(ds)
        return self.forest.predict(X)


class KNeighborsClassifier(Primitive):
    name = "k-nearest-neighbors"
    PARAMS = {"n_neighbors": _as_int, "weights": _as_choice("uniform", "distance")}

    def fit(self, ds: Dataset) -> "KNeighborsClassifier":
        self.X = _numeric_matrix(ds, self.name)
        self.y = ds.y.copy()
        self.n_classes = len(ds.class_labels)
        return self

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        Q = _numeric_matrix(ds, self.name)
        k = min(self.params.get("n_neighbors", 5), len(self.y))
        weights = self.params.get("weights", "uniform")
        d = np.sqrt(((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2))
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        out = np.zeros((Q.shape[0], self.n_classes))
        for i in range(Q.shape[0]):
            nd = d[i, order[i]]
            labels = self.y[order[i]]
            if weights == "uniform":
                w = np.ones(k)
            else:
                exact = nd == 0.0
                if exact.any():  # exact matches dominate inverse-distance weights
                    w = exact.astype(float)
                else:
                    w = 1.0 / nd
            for lbl, wi in zip(labels, w):
                out[i, lbl] += wi
            out[i] /= out[i].sum()
        return out


class LogisticRegressionGD(Primitive):
    """Multinomial logistic regression, full-batch gradient descent.

    500 epochs at learning rate 0.1 on internally standardized features:
    fixed by design so refits are reproducible without a solver dependency.
    """

    name = "logistic-regression"
    PARAMS = {"l2": _as_float}
    EPOCHS = 500
    LEARNING_RATE = 0.1

    def fit(self, ds: Dataset) -> "LogisticRegressionGD":
        X = _numeric_matrix(ds, self.name)
        self.n_classes = len(ds.class_labels)
        self.mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd = np.where(sd > 0, sd, 1.0)
        Z = (X - self.mean) / self.sd
        n, p = Z.shape
        Y = np.zeros((n, self.n_classes))
        Y[np.arange(n), ds.y] = 1.0
        l2 = self.params.get("l2", 0.0)
        W = np.zeros((p + 1, self.n_classes))
        Zb = np.hstack([np.ones((n, 1)), Z])
        for _ in range(self.EPOCHS):
            P = _softmax(Zb @ W)
            grad = Zb.T @ (P - Y) / n
            if l2 > 0:
                grad[1:] += l2 * W[1:]
            W -= self.LEARNING_RATE * grad
        self.W = W
        return self

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        X = _numeric_matrix(ds, self.name)
        Z = (X - self.mean) / self.sd
        Zb = np.hstack([np.ones((Z.shape[0], 1)), Z])
        return _softmax(Zb @ self.W)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GaussianNaiveBayes(Primitive):
    name = "gaussian-naive-bayes"
    PARAMS = {"var_smoothing": _as_float}

    def fit(self, ds: Dataset) -> "GaussianNaiveBayes":
        X = _numeric_matrix(ds, self.name)
        self.n_classes = len(ds.class_labels)
        eps = self.params.get("var_smoothing", 1e-9) * float(X.var(axis=0).max() or 1.0)
        n, p = X.shape
        self.theta = np.zeros((self.n_classes, p))
        self.var = np.full((self.n_classes, p), eps)
        self.log_prior = np.full(self.n_classes, -np.inf)
        for c in range(self.n_classes):
            rows = X[ds.y == c]
            if len(rows) == 0:
                continue
            self.theta[c] = rows.mean(axis=0)
            self.var[c] = rows.var(axis=0) + eps
            self.log_prior[c] = math.log(len(rows) / n)
        return self

    def predict_proba(self, ds: Dataset) -> np.ndarray:
        X = _numeric_matrix(ds, self.name)
        ll = np.full((X.shape[0], self.n_classes), -np.inf)
        for c in range(self.n_classes):
            if not np.isfinite(self.log_prior[c]):
                continue
            ll[:, c] = self.log_prior[c] - 0.5 * (
                np.log(2 * math.pi * self.var[c])
                + (X - self.theta[c]) ** 2 / self.var[c]).sum(axis=1)
        return _softmax(ll)


TRANSFORMERS = {
    cls.name: cls for cls in
    (MeanImputer, MostFrequentImputer, StandardScaler, MinMaxScaler, OneHotEncoder, Pca)}
CLASSIFIERS = {
    cls.name: cls for cls in
    (DecisionTreeClassifier, RandomForestClassifier, KNeighborsClassifier,
     LogisticRegressionGD, GaussianNaiveBayes)}
PRIMITIVES: dict[str, type] = {**TRANSFORMERS, **CLASSIFIERS}


def make_primitive(name: str, params: Optional[Mapping[str, Any]] = None,
                   seed: int = 0) -> Primitive:
    if name not in PRIMITIVES:
        raise UnsupportedPrimitiveError([name])
    return PRIMITIVES[name](params, seed)
