"""Deterministic model engine: pipeline refits, primitives, metrics."""

from .metrics import (PerformanceReport, accuracy, auc, confusion_matrix,
                      performance_report, precision_recall, roc_auc, roc_curve)
from .pipeline import (FittedPipeline, TailOracle, fit_candidate, node_seed,
                       stratified_split, transform_until)
from .primitives import (CLASSIFIERS, PRIMITIVES, TRANSFORMERS,
                         encode_features, make_primitive)
from .trees import Forest, TreeNode, fit_forest, fit_tree, predict_tree, tree_apply

__all__ = [
    "PerformanceReport", "accuracy", "auc", "confusion_matrix",
    "performance_report", "precision_recall", "roc_auc", "roc_curve",
    "FittedPipeline", "TailOracle", "fit_candidate", "node_seed",
    "stratified_split", "transform_until",
    "CLASSIFIERS", "PRIMITIVES", "TRANSFORMERS", "encode_features",
    "make_primitive",
    "Forest", "TreeNode", "fit_forest", "fit_tree", "predict_tree", "tree_apply",
]
