"""Model-agnostic explanations of pipelines and of the optimizer itself.

Four views, all driven by prediction oracles rather than model internals:
a global surrogate tree, a perturbation-based local surrogate, permutation
importance with partial-dependence / ICE curves, and a tree-marginal variance
decomposition that attributes run performance to hyperparameters and pairs.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence

import numpy as np

from .errors import (DegenerateInputError, InsufficientDataError,
                     NotFoundError, ValidationError)
from .model import (Dataset, Hyperparameter, KIND_CATEGORICAL, RunHistory,
                    SearchSpace, pad_with_defaults)
from .engine.primitives import encode_features
from .engine.trees import CAT, NUM, TreeNode, fit_tree, predict_tree
from .engine.metrics import accuracy

LIME_KERNEL_SCALE = 0.75
LIME_KERNEL_RETRIES = 3
MARGINAL_AXIS_POINTS = 20
MIN_IMPORTANCE_SAMPLES = 10
IMPORTANCE_TREES = 16
IMPORTANCE_MIN_LEAF = 3


class PredictionOracle(Protocol):
    class_labels: tuple[str, ...]

    def predict_proba(self, ds: Dataset) -> np.ndarray: ...


# ---------------------------------------------------------------------------
# global surrogate
# ---------------------------------------------------------------------------

@dataclass
class SurrogateTree:
    tree: TreeNode
    columns: tuple  # Column metadata of the fit data
    class_labels: tuple[str, ...]
    max_leaf_nodes: int
    fidelity: float

    def predict_labels(self, ds: Dataset) -> np.ndarray:
        # Encode against the surrogate's own vocabularies so a tree rebuilt
        # from JSON predicts identically regardless of the dataset's ordering.
        X = np.empty((ds.n_rows, len(self.columns)))
        for j, col in enumerate(self.columns):
            values = ds.data.get(col.name)
            if values is None:
                raise NotFoundError(f"dataset lacks surrogate feature {col.name!r}")
            if col.kind == "numeric":
                X[:, j] = np.asarray(values, dtype=float)
            else:
                lut = {v: float(i) for i, v in enumerate(col.vocabulary or ())}
                X[:, j] = [lut.get(v, math.nan) for v in values]
        return np.argmax(predict_tree(self.tree, X), axis=1)

    def to_json(self) -> dict:
        vocab = {c.name: list(c.vocabulary or ()) for c in self.columns
                 if c.kind == "categorical"}

        def node_doc(node: TreeNode) -> dict:
            if node.is_leaf:
                return {"type": "leaf",
                        "probabilities": [float(p) for p in node.value],
                        "n": int(node.n_samples)}
            col = self.columns[node.feature]
            doc: dict[str, Any] = {"type": "split", "feature": col.name,
                                   "missing": "left" if node.missing_left else "right"}
            if math.isnan(node.category):
                doc["threshold"] = float(node.threshold)
            else:
                doc["category"] = (col.vocabulary or ())[int(node.category)]
            doc["left"] = node_doc(node.left)
            doc["right"] = node_doc(node.right)
            return doc

        return {
            "classes": list(self.class_labels),
            "features": [
                {"name": c.name, "kind": c.kind,
                 **({"vocabulary": vocab[c.name]} if c.name in vocab else {})}
                for c in self.columns],
            "max_leaf_nodes": self.max_leaf_nodes,
            "fidelity": self.fidelity,
            "n_leaves": self.tree.leaf_count(),
            "tree": node_doc(self.tree),
        }


def global_surrogate(oracle: PredictionOracle, data: Dataset,
                     max_leaf_nodes: int = 8) -> SurrogateTree:
    """Distill the oracle into a small tree over ``data``'s feature space.

    The tree is grown best-first (largest impurity decrease expands next)
    until it holds ``max_leaf_nodes`` leaves, and fidelity is the agreement
    with the oracle's labels on the same rows.
    """
    if max_leaf_nodes < 2:
        raise ValidationError("max_leaf_nodes must be at least 2")
    if data.n_rows == 0:
        raise ValidationError("cannot fit a surrogate on an empty dataset")
    labels = np.argmax(oracle.predict_proba(data), axis=1)
    X, kinds, _ = encode_features(data)
    tree = fit_tree(X, kinds, labels, task="classify",
                    n_classes=len(oracle.class_labels),
                    max_leaf_nodes=max_leaf_nodes)
    surrogate = SurrogateTree(tree=tree, columns=data.columns,
                              class_labels=tuple(oracle.class_labels),
                              max_leaf_nodes=max_leaf_nodes, fidelity=0.0)
    surrogate.fidelity = accuracy(labels, surrogate.predict_labels(data))
    return surrogate


def surrogate_from_json(doc: dict) -> SurrogateTree:
    """Rebuild an exported surrogate; predictions match the original."""
    from .model import Column

    columns = tuple(
        Column(f["name"], f["kind"], tuple(f.get("vocabulary", ())) or None)
        for f in doc["features"])
    index = {c.name: i for i, c in enumerate(columns)}

    def build(node_doc: dict) -> TreeNode:
        if node_doc["type"] == "leaf":
            return TreeNode(value=np.asarray(node_doc["probabilities"], dtype=float),
                            n_samples=node_doc["n"], impurity=0.0)
        col = columns[index[node_doc["feature"]]]
        node = TreeNode(value=np.zeros(len(doc["classes"])), n_samples=0, impurity=0.0,
                        feature=index[node_doc["feature"]],
                        missing_left=node_doc["missing"] == "left")
        if "threshold" in node_doc:
            node.threshold = float(node_doc["threshold"])
        else:
            node.category = float((col.vocabulary or ()).index(node_doc["category"]))
        node.left = build(node_doc["left"])
        node.right = build(node_doc["right"])
        return node

    return SurrogateTree(tree=build(doc["tree"]), columns=columns,
                         class_labels=tuple(doc["classes"]),
                         max_leaf_nodes=doc["max_leaf_nodes"],
                         fidelity=doc["fidelity"])


# ---------------------------------------------------------------------------
# local surrogate
# ---------------------------------------------------------------------------

@dataclass
class LocalExplanation:
    row_index: int
    explained_class: str
    instance_probabilities: list[float]
    intercept: float
    weights: list[tuple[str, float]]  # signed, per feature
    kernel_width: float
    n_samples: int
    local_prediction: float

    def to_json(self) -> dict:
        return {
            "row_index": self.row_index,
            "explained_class": self.explained_class,
            "instance_probabilities": self.instance_probabilities,
            "intercept": self.intercept,
            "weights": [{"feature": f, "weight": w} for f, w in self.weights],
            "kernel_width": self.kernel_width,
            "n_samples": self.n_samples,
            "local_prediction": self.local_prediction,
        }


def local_surrogate(oracle: PredictionOracle, data: Dataset, row_index: int,
                    n_samples: int = 1000, seed: int = 0) -> LocalExplanation:
    """Weighted linear fit around one record.

    Numeric features perturb with Gaussian noise at the column's standard
    deviation; categorical features resample from the column's empirical
    distribution.  Sample weights use an exponential kernel on standardized
    Euclidean distance with width 0.75 * sqrt(p); a collapsed kernel widens
    twice over up to three attempts before giving up.
    """
    if not 0 <= row_index < data.n_rows:
        raise NotFoundError(f"row {row_index} out of range (n={data.n_rows})")
    if n_samples < 2:
        raise ValidationError("n_samples must be at least 2")
    rng = np.random.default_rng(seed)
    p = len(data.columns)

    # perturbed dataset, instance first
    perturbed: dict[str, np.ndarray] = {}
    stats: dict[str, tuple[float, float]] = {}
    for col in data.columns:
        values = data.data[col.name]
        if col.kind == "numeric":
            v = np.asarray(values, dtype=float)
            obs = v[~np.isnan(v)]
            center = float(v[row_index])
            if math.isnan(center):
                center = float(obs.mean()) if obs.size else 0.0
            sd = float(obs.std()) if obs.size else 0.0
            out = center + rng.normal(0.0, sd, size=n_samples)
            out[0] = center
            mean = float(obs.mean()) if obs.size else 0.0
            stats[col.name] = (mean, sd if sd > 0 else 1.0)
            perturbed[col.name] = out
        else:
            pool = [x for x in values if x is not None]
            if not pool:
                pool = [""]
            out = rng.choice(np.array(pool, dtype=object), size=n_samples)
            out[0] = values[row_index]
            perturbed[col.name] = out

    sampled = data.take(np.full(n_samples, row_index)).with_features(
        data.columns, perturbed)
    proba = oracle.predict_proba(sampled)
    target = int(np.argmax(proba[0]))
    y = proba[:, target]

    # design matrix: standardized numerics, match indicators for categoricals
    Z = np.empty((n_samples, p))
    for j, col in enumerate(data.columns):
        if col.kind == "numeric":
            mean, sd = stats[col.name]
            Z[:, j] = (np.asarray(perturbed[col.name], dtype=float) - mean) / sd
        else:
            instance_value = perturbed[col.name][0]
            Z[:, j] = np.array([1.0 if v == instance_value else 0.0
                                for v in perturbed[col.name]])
    d = np.sqrt(((Z - Z[0]) ** 2).sum(axis=1))

    width = LIME_KERNEL_SCALE * math.sqrt(p)
    for attempt in range(LIME_KERNEL_RETRIES + 1):
        w = np.exp(-(d / width) ** 2)
        if w.sum() > 1e-12 and (w > 1e-12).sum() >= 2:
            break
        if attempt == LIME_KERNEL_RETRIES:
            raise DegenerateInputError(
                "local surrogate kernel collapsed after widening 3 times")
        width *= 2.0

    A = np.hstack([np.ones((n_samples, 1)), Z])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    return LocalExplanation(
        row_index=row_index,
        explained_class=data.class_labels[target] if target < len(data.class_labels)
        else str(target),
        instance_probabilities=[float(v) for v in proba[0]],
        intercept=float(beta[0]),
        weights=[(c.name, float(beta[1 + j])) for j, c in enumerate(data.columns)],
        kernel_width=width,
        n_samples=n_samples,
        local_prediction=float(A[0] @ beta),
    )


# ---------------------------------------------------------------------------
# hyperparameter importance
# ---------------------------------------------------------------------------

@dataclass
class _LeafBox:
    value: float
    weight: float          # fraction of the config space this leaf covers
    lo: np.ndarray         # per-dim interval starts (numeric dims)
    hi: np.ndarray
    subsets: list[Optional[frozenset]]  # per-dim code subsets (categorical dims)


class _TreeMarginals:
    """Exact marginal statistics of one piecewise-constant regression tree.

    The tree partitions the (normalized) config hyper-box into leaf boxes.
    Marginalizing over all dimensions but U reduces to weighted sums of leaf
    values over the projection onto U, which difference arrays evaluate in
    closed form: no sampling, no grids.
    """

    def __init__(self, tree: TreeNode, hps: Sequence[Hyperparameter]):
        self.hps = list(hps)
        self.dims = len(hps)
        self.leaves: list[_LeafBox] = []
        lo = np.zeros(self.dims)
        hi = np.ones(self.dims)
        subsets: list[Optional[frozenset]] = [
            None if hp.is_numeric else frozenset(range(len(hp.choices)))
            for hp in hps]
        self._walk(tree, lo, hi, subsets)
        self.total_weight = sum(l.weight for l in self.leaves)
        self.mean = sum(l.weight * l.value for l in self.leaves)
        self.variance = sum(l.weight * l.value ** 2 for l in self.leaves) - self.mean ** 2
        self.variance = max(0.0, self.variance)
        # atomic segment boundaries per numeric dim
        self.boundaries: list[np.ndarray] = []
        for d in range(self.dims):
            if self.hps[d].is_numeric:
                pts = {0.0, 1.0}
                for leaf in self.leaves:
                    pts.add(float(leaf.lo[d]))
                    pts.add(float(leaf.hi[d]))
                self.boundaries.append(np.array(sorted(pts)))
            else:
                self.boundaries.append(np.array([]))

    def _walk(self, node: TreeNode, lo, hi, subsets) -> None:
        if node.is_leaf:
            weight = 1.0
            for d in range(self.dims):
                if subsets[d] is None:
                    weight *= max(0.0, hi[d] - lo[d])
                else:
                    weight *= len(subsets[d]) / len(self.hps[d].choices)
            if weight > 0:
                self.leaves.append(_LeafBox(float(node.value), weight,
                                            lo.copy(), hi.copy(), list(subsets)))
            return
        d = node.feature
        if math.isnan(node.category):
            t = node.threshold
            llo, lhi = lo.copy(), hi.copy()
            lhi[d] = min(hi[d], t)
            rlo, rhi = lo.copy(), hi.copy()
            rlo[d] = max(lo[d], t)
            if lhi[d] > llo[d]:
                self._walk(node.left, llo, lhi, subsets)
            if rhi[d] > rlo[d]:
                self._walk(node.right, rlo, rhi, subsets)
        else:
            c = int(node.category)
            left_set = subsets[d] & {c}
            right_set = subsets[d] - {c}
            if left_set:
                self._walk(node.left, lo, hi, subsets[:d] + [left_set] + subsets[d + 1:])
            if right_set:
                self._walk(node.right, lo, hi, subsets[:d] + [right_set] + subsets[d + 1:])

    def _cells(self, d: int) -> tuple[int, np.ndarray]:
        """Atomic cell count and measures along dimension d."""
        if self.hps[d].is_numeric:
            b = self.boundaries[d]
            return len(b) - 1, np.diff(b)
        k = len(self.hps[d].choices)
        return k, np.full(k, 1.0 / k)

    def _span(self, leaf: _LeafBox, d: int) -> tuple[int, int, Optional[frozenset]]:
        if self.hps[d].is_numeric:
            b = self.boundaries[d]
            a = bisect.bisect_left(b, leaf.lo[d])
            z = bisect.bisect_left(b, leaf.hi[d])
            return a, z, None
        return 0, 0, leaf.subsets[d]

    def _rest_weight(self, leaf: _LeafBox, dims: tuple[int, ...]) -> float:
        w = leaf.weight
        for d in dims:
            if self.hps[d].is_numeric:
                span = leaf.hi[d] - leaf.lo[d]
                w /= span if span > 0 else 1.0
            else:
                w /= len(leaf.subsets[d]) / len(self.hps[d].choices)
        return w

    def marginal_single(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """(cell measures, marginal value per atomic cell) along dim d."""
        n, measures = self._cells(d)
        acc = np.zeros(n + 1)
        for leaf in self.leaves:
            w = self._rest_weight(leaf, (d,))
            if self.hps[d].is_numeric:
                a, z, _ = self._span(leaf, d)
                acc[a] += w * leaf.value
                acc[z] -= w * leaf.value
            else:
                for c in leaf.subsets[d]:
                    acc[c] += w * leaf.value
                    acc[c + 1] -= w * leaf.value
        return measures, np.cumsum(acc[:-1])

    def marginal_pair(self, d1: int, d2: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n1, m1 = self._cells(d1)
        n2, m2 = self._cells(d2)
        acc = np.zeros((n1 + 1, n2 + 1))
        for leaf in self.leaves:
            w = self._rest_weight(leaf, (d1, d2)) * leaf.value
            r1 = self._ranges(leaf, d1)
            r2 = self._ranges(leaf, d2)
            for a1, z1 in r1:
                for a2, z2 in r2:
                    acc[a1, a2] += w
                    acc[a1, z2] -= w
                    acc[z1, a2] -= w
                    acc[z1, z2] += w
        grid = np.cumsum(np.cumsum(acc, axis=0), axis=1)[:-1, :-1]
        return m1, m2, grid

    def _ranges(self, leaf: _LeafBox, d: int) -> list[tuple[int, int]]:
        if self.hps[d].is_numeric:
            a, z, _ = self._span(leaf, d)
            return [(a, z)]
        return [(c, c + 1) for c in sorted(leaf.subsets[d])]

    def variance_single(self, d: int) -> float:
        measures, values = self.marginal_single(d)
        mean = float(measures @ values)
        return max(0.0, float(measures @ (values ** 2)) - mean ** 2)

    def variance_pair(self, d1: int, d2: int) -> float:
        m1, m2, grid = self.marginal_pair(d1, d2)
        weights = np.outer(m1, m2)
        mean = float((weights * grid).sum())
        return max(0.0, float((weights * grid ** 2).sum()) - mean ** 2)

    def curve_single(self, d: int, points: np.ndarray | Sequence[int]) -> np.ndarray:
        """Marginal value at normalized points (numeric) or codes (categorical)."""
        measures, values = self.marginal_single(d)
        if self.hps[d].is_numeric:
            b = self.boundaries[d]
            idx = np.clip(np.searchsorted(b, points, side="right") - 1, 0, len(values) - 1)
            return values[idx]
        return values[np.asarray(points, dtype=int)]


@dataclass
class ImportanceEntry:
    hyperparameters: tuple[str, ...]
    importance: float
    marginal: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"hyperparameters": list(self.hyperparameters),
                "importance": self.importance,
                "marginal": self.marginal}


@dataclass
class ImportanceTable:
    singles: list[ImportanceEntry]
    pairs: list[ImportanceEntry]
    n_samples: int
    n_trees: int

    def to_json(self) -> dict:
        return {"singles": [e.to_json() for e in self.singles],
                "pairs": [e.to_json() for e in self.pairs],
                "n_samples": self.n_samples,
                "n_trees": self.n_trees}

    def by_name(self, *names: str) -> ImportanceEntry:
        key = tuple(sorted(names))
        for e in self.singles + self.pairs:
            if tuple(sorted(e.hyperparameters)) == key:
                return e
        raise NotFoundError(f"no importance entry for {names}")


def _encode_configs(space: SearchSpace, configs: Sequence[dict]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Padded configs as a normalized matrix: numeric in [0, 1], codes for categoricals."""
    hps = space.hyperparameters
    X = np.empty((len(configs), len(hps)))
    kinds = []
    for j, hp in enumerate(hps):
        if hp.is_numeric:
            span = (hp.upper - hp.lower) or 1.0
            X[:, j] = [(float(c[hp.name]) - hp.lower) / span for c in configs]
            kinds.append(NUM)
        else:
            lut = {v: float(i) for i, v in enumerate(hp.choices)}
            X[:, j] = [lut[c[hp.name]] for c in configs]
            kinds.append(CAT)
    return X, tuple(kinds)


def hp_importance_from_configs(space: SearchSpace, configs: Sequence[dict],
                               values: Sequence[float], seed: int = 0,
                               n_trees: int = IMPORTANCE_TREES) -> ImportanceTable:
    """Variance-based hyperparameter importance from (config, performance) pairs.

    A seeded bagged regression forest is fit on the padded configs; each
    tree's exact marginal variances attribute the performance variance to
    single hyperparameters and to pairwise interactions (joint minus singles,
    clamped at zero).
    """
    if len(configs) < MIN_IMPORTANCE_SAMPLES:
        raise InsufficientDataError(
            f"hyperparameter importance needs at least {MIN_IMPORTANCE_SAMPLES} "
            f"scored candidates, got {len(configs)}")
    hps = space.hyperparameters
    X, kinds = _encode_configs(space, configs)
    y = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    n = len(y)

    marginals: list[_TreeMarginals] = []
    for _ in range(n_trees):
        boot = rng.integers(0, n, size=n)
        tree = fit_tree(X[boot], kinds, y[boot], task="regress",
                        min_samples_leaf=IMPORTANCE_MIN_LEAF)
        marginals.append(_TreeMarginals(tree, hps))

    def tree_ratio(fn) -> float:
        ratios = []
        for tm in marginals:
            ratios.append(fn(tm) / tm.variance if tm.variance > 1e-18 else 0.0)
        return float(np.mean(ratios))

    singles: list[ImportanceEntry] = []
    single_ratio: dict[int, float] = {}
    for d, hp in enumerate(hps):
        single_ratio[d] = tree_ratio(lambda tm, d=d: tm.variance_single(d))
        if hp.is_numeric:
            axis = np.linspace(0.0, 1.0, MARGINAL_AXIS_POINTS)
            curve = np.mean([tm.curve_single(d, axis) for tm in marginals], axis=0)
            grid = [hp.lower + a * (hp.upper - hp.lower) for a in axis]
        else:
            codes = np.arange(len(hp.choices))
            curve = np.mean([tm.curve_single(d, codes) for tm in marginals], axis=0)
            grid = list(hp.choices)
        singles.append(ImportanceEntry(
            (hp.name,), single_ratio[d],
            {"grid": grid, "values": [float(v) for v in curve]}))

    pairs: list[ImportanceEntry] = []
    for d1 in range(len(hps)):
        for d2 in range(d1 + 1, len(hps)):
            joint = tree_ratio(lambda tm: tm.variance_pair(d1, d2))
            interaction = max(0.0, joint - single_ratio[d1] - single_ratio[d2])
            pairs.append(ImportanceEntry(
                (hps[d1].name, hps[d2].name), interaction,
                {"joint_importance": joint}))
    singles.sort(key=lambda e: (-e.importance, e.hyperparameters))
    pairs.sort(key=lambda e: (-e.importance, e.hyperparameters))
    return ImportanceTable(singles=singles, pairs=pairs, n_samples=n, n_trees=n_trees)


def hp_importance(history: RunHistory, seed: int = 0,
                  structure_of: Optional[str] = None) -> ImportanceTable:
    """Importance over a run's scored candidates, optionally filtered to the
    candidates sharing one candidate's pipeline structure."""
    merged = history.merged_space()
    candidates = history.scored_candidates()
    if structure_of is not None:
        signature = history.candidate(structure_of).pipeline.signature()
        candidates = tuple(c for c in candidates if c.pipeline.signature() == signature)
    configs = [pad_with_defaults(c.config, merged) for c in candidates]
    values = [c.validation_performance for c in candidates]
    return hp_importance_from_configs(merged, configs, values, seed=seed)


# ---------------------------------------------------------------------------
# feature effects
# ---------------------------------------------------------------------------

@dataclass
class FeatureEffects:
    permutation: list[dict]
    effects: list[dict]
    class_labels: tuple[str, ...]
    baseline_accuracy: float
    n_repeats: int
    grid_size: int

    def to_json(self) -> dict:
        return {"permutation": self.permutation,
                "effects": self.effects,
                "classes": list(self.class_labels),
                "baseline_accuracy": self.baseline_accuracy,
                "n_repeats": self.n_repeats,
                "grid_size": self.grid_size}


def partial_dependence(oracle: PredictionOracle, data: Dataset, feature: str,
                       values: Sequence) -> dict:
    """PDP and ICE for one feature at explicit grid values.

    ICE holds one curve per row; the PDP is their pointwise mean by
    construction.
    """
    col = data.column(feature)
    n = data.n_rows
    k = len(oracle.class_labels)
    ice = np.empty((len(values), n, k))
    for g, v in enumerate(values):
        if col.kind == "numeric":
            forced = np.full(n, float(v))
        else:
            forced = np.array([v] * n, dtype=object)
        ice[g] = oracle.predict_proba(data.replace_values(feature, forced))
    pdp = ice.mean(axis=1)
    return {
        "feature": feature,
        "kind": col.kind,
        "grid": [float(v) if col.kind == "numeric" else v for v in values],
        "pdp": {oracle.class_labels[c]: [float(x) for x in pdp[:, c]] for c in range(k)},
        "ice": {oracle.class_labels[c]: ice[:, :, c].T.tolist() for c in range(k)},
    }


def _quantile_grid(values: np.ndarray, grid_size: int) -> np.ndarray:
    obs = values[~np.isnan(values)]
    if obs.size == 0:
        return np.array([])
    qs = np.linspace(0.0, 1.0, grid_size)
    return np.unique(np.quantile(obs, qs))


def feature_effects(oracle: PredictionOracle, data: Dataset, n_repeats: int = 5,
                    grid_size: int = 20, seed: int = 0) -> FeatureEffects:
    """Permutation importance plus PDP/ICE curves for every feature."""
    if data.n_rows == 0:
        raise ValidationError("feature effects need at least one row")
    rng = np.random.default_rng(seed)
    proba = oracle.predict_proba(data)
    baseline = accuracy(data.y, np.argmax(proba, axis=1))

    permutation = []
    for col in data.columns:
        drops = []
        for _ in range(n_repeats):
            perm = rng.permutation(data.n_rows)
            shuffled = data.replace_values(col.name, data.data[col.name][perm])
            acc = accuracy(data.y, np.argmax(oracle.predict_proba(shuffled), axis=1))
            drops.append(baseline - acc)
        permutation.append({"feature": col.name,
                            "importance": float(np.mean(drops)),
                            "sd": float(np.std(drops))})

    effects = []
    for col in data.columns:
        if col.kind == "numeric":
            grid = _quantile_grid(np.asarray(data.data[col.name], dtype=float), grid_size)
            values: Sequence = [float(v) for v in grid]
        else:
            values = list(col.vocabulary or ())
        if len(values) == 0:
            continue
        effects.append(partial_dependence(oracle, data, col.name, values))

    order = {e["feature"]: e["importance"] for e in permutation}
    permutation.sort(key=lambda e: (-e["importance"], e["feature"]))
    effects.sort(key=lambda e: (-order.get(e["feature"], 0.0), e["feature"]))
    return FeatureEffects(
        permutation=permutation,
        effects=effects,
        class_labels=tuple(oracle.class_labels),
        baseline_accuracy=baseline,
        n_repeats=n_repeats,
        grid_size=grid_size,
    )
