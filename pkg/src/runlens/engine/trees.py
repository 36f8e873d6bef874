"""CART trees and bagged forests used by the model zoo and the explainers.

Features arrive as one float matrix: numeric columns hold raw values,
categorical columns hold integer vocabulary codes, NaN marks missing cells.
Numeric features split at midpoints between consecutive distinct values,
categorical features split one-vs-rest on a single code.  Missing values
follow the child that received more training rows (tie: left).  Ties between
equally good splits resolve toward the lower feature index, then the lower
threshold/code, which keeps every tree bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ValidationError

NUM = "num"
CAT = "cat"


@dataclass
class TreeNode:
    value: np.ndarray | float  # class probabilities, or the mean response
    n_samples: int
    impurity: float
    feature: int = -1
    threshold: float = math.nan  # numeric split: x <= threshold goes left
    category: float = math.nan   # categorical split: x == category goes left
    missing_left: bool = True
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaf_count() + self.right.leaf_count()

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class _Split:
    gain: float
    feature: int
    threshold: float
    category: float
    missing_left: bool
    left_idx: np.ndarray
    right_idx: np.ndarray


def _class_impurity_times_n(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    return float(n - (counts.astype(float) ** 2).sum() / n)


def _value_impurity_times_n(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(((values - values.mean()) ** 2).sum())


class _Builder:
    def __init__(self, X: np.ndarray, kinds: Sequence[str], y: np.ndarray,
                 *, task: str, n_classes: int = 0,
                 max_depth: Optional[int] = None,
                 min_samples_split: int = 2,
                 min_samples_leaf: int = 1,
                 max_leaf_nodes: Optional[int] = None,
                 max_features: Optional[int] = None,
                 rng: Optional[np.random.Generator] = None):
        if task not in ("classify", "regress"):
            raise ValidationError(f"unknown tree task {task!r}")
        self.X = np.asarray(X, dtype=float)
        self.kinds = tuple(kinds)
        self.y = np.asarray(y)
        self.task = task
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_samples_split = max(2, min_samples_split)
        self.min_samples_leaf = max(1, min_samples_leaf)
        self.max_leaf_nodes = max_leaf_nodes
        self.max_features = max_features
        self.rng = rng

    # -- node values ------------------------------------------------------

    def _counts(self, idx: np.ndarray) -> np.ndarray:
        return np.bincount(self.y[idx], minlength=self.n_classes)

    def _leaf(self, idx: np.ndarray) -> TreeNode:
        if self.task == "classify":
            counts = self._counts(idx)
            return TreeNode(value=counts / max(1, counts.sum()),
                            n_samples=len(idx),
                            impurity=_class_impurity_times_n(counts) / max(1, len(idx)))
        values = self.y[idx].astype(float)
        mean = float(values.mean()) if values.size else 0.0
        return TreeNode(value=mean, n_samples=len(idx),
                        impurity=_value_impurity_times_n(values) / max(1, len(idx)))

    def _impurity_times_n(self, idx: np.ndarray) -> float:
        if self.task == "classify":
            return _class_impurity_times_n(self._counts(idx))
        return _value_impurity_times_n(self.y[idx].astype(float))

    # -- split search -----------------------------------------------------

    def _candidate_features(self) -> Sequence[int]:
        p = self.X.shape[1]
        if self.max_features is None or self.max_features >= p:
            return range(p)
        chosen = self.rng.choice(p, size=self.max_features, replace=False)
        return sorted(int(f) for f in chosen)

    def _split_stats_classify(self, rows_sorted: np.ndarray):
        Y = np.zeros((len(rows_sorted), self.n_classes))
        Y[np.arange(len(rows_sorted)), self.y[rows_sorted]] = 1.0
        return np.cumsum(Y, axis=0)

    def _eval_partitions(self, parent_itn: float, left_sets, miss_idx: np.ndarray):
        """Score a batch of observed-row partitions with missing-row routing."""
        best = None
        m_n = len(miss_idx)
        for left_obs, right_obs, thr, cat in left_sets:
            nl, nr = len(left_obs), len(right_obs)
            missing_left = nl >= nr
            left_idx = np.concatenate([left_obs, miss_idx]) if (m_n and missing_left) else left_obs
            right_idx = np.concatenate([right_obs, miss_idx]) if (m_n and not missing_left) else right_obs
            if len(left_idx) < self.min_samples_leaf or len(right_idx) < self.min_samples_leaf:
                continue
            gain = parent_itn - self._impurity_times_n(left_idx) - self._impurity_times_n(right_idx)
            if best is None or gain > best.gain + 1e-12:
                best = _Split(gain, -1, thr, cat, missing_left, left_idx, right_idx)
        return best

    def _best_split(self, idx: np.ndarray) -> Optional[_Split]:
        n = len(idx)
        if n < self.min_samples_split:
            return None
        parent_itn = self._impurity_times_n(idx)
        if parent_itn <= 1e-12:
            return None
        best: Optional[_Split] = None
        for f in self._candidate_features():
            col = self.X[idx, f]
            obs_mask = ~np.isnan(col)
            obs_idx = idx[obs_mask]
            miss_idx = idx[~obs_mask]
            v = col[obs_mask]
            if len(obs_idx) == 0:
                continue
            split = None
            if self.kinds[f] == NUM:
                split = self._best_numeric(f, obs_idx, v, miss_idx, parent_itn)
            else:
                split = self._best_categorical(f, obs_idx, v, miss_idx, parent_itn)
            if split is not None and (best is None or split.gain > best.gain + 1e-12):
                split.feature = f
                best = split
        if best is not None and best.gain <= 1e-12:
            return None
        return best

    def _best_numeric(self, f: int, obs_idx, v, miss_idx, parent_itn) -> Optional[_Split]:
        order = np.argsort(v, kind="stable")
        vs = v[order]
        rows = obs_idx[order]
        distinct = np.nonzero(vs[:-1] < vs[1:])[0]  # cut after position i
        if distinct.size == 0:
            return None
        n_obs = len(rows)
        m_n = len(miss_idx)

        if self.task == "classify":
            cum = self._split_stats_classify(rows)
            total = cum[-1]
            left_cnt = cum[distinct]
            right_cnt = total - left_cnt
            m_cnt = np.bincount(self.y[miss_idx], minlength=self.n_classes).astype(float)
        else:
            yv = self.y[rows].astype(float)
            cums = np.cumsum(yv)
            cumsq = np.cumsum(yv ** 2)
            m_vals = self.y[miss_idx].astype(float)
            m_sum, m_sq = m_vals.sum(), (m_vals ** 2).sum()

        nl_obs = distinct + 1
        nr_obs = n_obs - nl_obs
        join_left = nl_obs >= nr_obs
        nl = nl_obs + m_n * join_left
        nr = nr_obs + m_n * (~join_left)

        if self.task == "classify":
            jl = join_left[:, None]
            L = left_cnt + m_cnt * jl
            R = right_cnt + m_cnt * (~jl)
            with np.errstate(divide="ignore", invalid="ignore"):
                left_itn = nl - (L ** 2).sum(axis=1) / np.maximum(nl, 1)
                right_itn = nr - (R ** 2).sum(axis=1) / np.maximum(nr, 1)
        else:
            ls = cums[distinct] + m_sum * join_left
            lq = cumsq[distinct] + m_sq * join_left
            rs = (cums[-1] - cums[distinct]) + m_sum * (~join_left)
            rq = (cumsq[-1] - cumsq[distinct]) + m_sq * (~join_left)
            left_itn = lq - ls ** 2 / np.maximum(nl, 1)
            right_itn = rq - rs ** 2 / np.maximum(nr, 1)

        gains = parent_itn - left_itn - right_itn
        valid = (nl >= self.min_samples_leaf) & (nr >= self.min_samples_leaf)
        if not valid.any():
            return None
        gains = np.where(valid, gains, -np.inf)
        k = int(np.argmax(gains))  # first maximum: lowest threshold wins ties
        if not np.isfinite(gains[k]):
            return None
        cut = distinct[k]
        thr = (vs[cut] + vs[cut + 1]) / 2.0
        left_obs = rows[:cut + 1]
        right_obs = rows[cut + 1:]
        ml = bool(join_left[k])
        left_idx = np.concatenate([left_obs, miss_idx]) if (m_n and ml) else left_obs
        right_idx = np.concatenate([right_obs, miss_idx]) if (m_n and not ml) else right_obs
        return _Split(float(gains[k]), f, float(thr), math.nan, ml, left_idx, right_idx)

    def _best_categorical(self, f: int, obs_idx, v, miss_idx, parent_itn) -> Optional[_Split]:
        sets = []
        for c in np.unique(v):
            mask = v == c
            if mask.all():
                continue  # a one-sided partition is no split
            sets.append((obs_idx[mask], obs_idx[~mask], math.nan, float(c)))
        split = self._eval_partitions(parent_itn, sets, miss_idx)
        if split is not None:
            split.feature = f
        return split

    # -- growth -----------------------------------------------------------

    def build(self) -> TreeNode:
        root_idx = np.arange(len(self.y))
        if self.max_leaf_nodes is None:
            return self._grow_recursive(root_idx, 0)
        return self._grow_best_first(root_idx)

    def _grow_recursive(self, idx: np.ndarray, d: int) -> TreeNode:
        node = self._leaf(idx)
        if self.max_depth is not None and d >= self.max_depth:
            return node
        split = self._best_split(idx)
        if split is None:
            return node
        node.feature = split.feature
        node.threshold = split.threshold
        node.category = split.category
        node.missing_left = split.missing_left
        node.left = self._grow_recursive(split.left_idx, d + 1)
        node.right = self._grow_recursive(split.right_idx, d + 1)
        return node

    def _grow_best_first(self, root_idx: np.ndarray) -> TreeNode:
        root = self._leaf(root_idx)
        frontier: list[tuple[float, int, TreeNode, _Split, int]] = []
        counter = 0

        def consider(node: TreeNode, idx: np.ndarray, d: int):
            nonlocal counter
            if self.max_depth is not None and d >= self.max_depth:
                return
            split = self._best_split(idx)
            if split is not None:
                frontier.append((split.gain, -counter, node, split, d))
                counter += 1

        consider(root, root_idx, 0)
        leaves = 1
        while frontier and leaves < self.max_leaf_nodes:
            frontier.sort()  # largest gain last, earliest insertion wins ties
            gain, _, node, split, d = frontier.pop()
            node.feature = split.feature
            node.threshold = split.threshold
            node.category = split.category
            node.missing_left = split.missing_left
            node.left = self._leaf(split.left_idx)
            node.right = self._leaf(split.right_idx)
            leaves += 1
            consider(node.left, split.left_idx, d + 1)
            consider(node.right, split.right_idx, d + 1)
        return root


def fit_tree(X, kinds, y, *, task, n_classes=0, max_depth=None, min_samples_split=2,
             min_samples_leaf=1, max_leaf_nodes=None, max_features=None,
             rng=None) -> TreeNode:
    """Grow a CART tree; see the module docstring for the split rules."""
    return _Builder(X, kinds, y, task=task, n_classes=n_classes, max_depth=max_depth,
                    min_samples_split=min_samples_split,
                    min_samples_leaf=min_samples_leaf,
                    max_leaf_nodes=max_leaf_nodes, max_features=max_features,
                    rng=rng).build()


def _route_masks(node: TreeNode, X: np.ndarray, mask: np.ndarray):
    col = X[:, node.feature]
    missing = np.isnan(col)
    if math.isnan(node.category):
        goes_left = col <= node.threshold
    else:
        goes_left = col == node.category
    goes_left = np.where(missing, node.missing_left, goes_left)
    return mask & goes_left, mask & ~goes_left


def predict_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    """Per-row leaf values: (n, k) probabilities or (n,) means."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if isinstance(node.value, np.ndarray):
        out = np.zeros((n, len(node.value)))
    else:
        out = np.zeros(n)
    stack = [(node, np.ones(n, dtype=bool))]
    while stack:
        cur, mask = stack.pop()
        if not mask.any():
            continue
        if cur.is_leaf:
            out[mask] = cur.value
            continue
        lm, rm = _route_masks(cur, X, mask)
        stack.append((cur.left, lm))
        stack.append((cur.right, rm))
    return out


def tree_apply(node: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf id (preorder index) per row."""
    X = np.asarray(X, dtype=float)
    ids = np.zeros(X.shape[0], dtype=int)
    leaf_no = 0

    def walk(cur: TreeNode, mask: np.ndarray):
        nonlocal leaf_no
        if cur.is_leaf:
            ids[mask] = leaf_no
            leaf_no += 1
            return
        lm, rm = _route_masks(cur, X, mask)
        walk(cur.left, lm)
        walk(cur.right, rm)

    walk(node, np.ones(X.shape[0], dtype=bool))
    return ids


@dataclass
class Forest:
    """Bagged trees; classification averages probabilities, regression means."""

    trees: list[TreeNode] = field(default_factory=list)
    task: str = "classify"
    n_classes: int = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        preds = [predict_tree(t, X) for t in self.trees]
        return np.mean(preds, axis=0)


def fit_forest(X, kinds, y, *, task, n_classes=0, n_trees=25, max_depth=None,
               min_samples_split=2, min_samples_leaf=1, max_features=None,
               seed=0) -> Forest:
    """Bootstrap-bagged forest, bit-reproducible for a given seed."""
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    forest = Forest(task=task, n_classes=n_classes)
    for _ in range(n_trees):
        boot = rng.integers(0, n, size=n)
        tree_rng = np.random.default_rng(rng.integers(0, 2 ** 31 - 1))
        tree = fit_tree(X[boot], kinds, np.asarray(y)[boot], task=task,
                        n_classes=n_classes, max_depth=max_depth,
                        min_samples_split=min_samples_split,
                        min_samples_leaf=min_samples_leaf,
                        max_features=max_features, rng=tree_rng)
        forest.trees.append(tree)
    return forest
