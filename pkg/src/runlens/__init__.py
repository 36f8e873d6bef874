"""runlens: analytics engine and explorer for AutoML optimization run histories."""

from .analyses import RunBundle, RunRegistry, available_operations, render
from .cache import AnalysisCache, cache_key
from .coverage import (boundary_candidates, coverage_timelapse, distance,
                       distance_matrix, embed, fit_surface, heatmap)
from .cpc import (MISSING, CandidatePolyline, CpcAxisTree, brush, build_axes,
                  project, sampling_history)
from .engine import (FittedPipeline, fit_candidate, performance_report,
                     transform_until)
from .ensemble import (EnsembleMember, decision_surface, ensemble_predict,
                       prediction_matrix)
from .errors import (DegenerateInputError, InsufficientDataError, LoadError,
                     MergeError, NotFoundError, RunLensError,
                     UnsupportedPrimitiveError, UnsupportedTopologyError,
                     ValidationError)
from .explain import (FeatureEffects, ImportanceEntry, ImportanceTable,
                      LocalExplanation, SurrogateTree, feature_effects,
                      global_surrogate, hp_importance,
                      hp_importance_from_configs, local_surrogate,
                      partial_dependence, surrogate_from_json)
from .exports import available_artifacts, export_artifact
from .model import (Candidate, Condition, Dataset, EnsembleSpec,
                    Hyperparameter, PipelineEdge, PipelineGraph, PipelineNode,
                    RunHistory, SearchSpace, dataset_from_csv, dataset_to_csv,
                    load_run_history, merge_search_spaces, pad_with_defaults,
                    serialize_run_history, write_run_history)
from .serialize import canonical_bytes, parameter_hash, sanitize
from .simulate import simulate_random_search, synthetic_dataset
from .structure import MergedGraph, build_cost_matrix, hungarian, merge, snapshot

__version__ = "0.1.0"

__all__ = [
    "Candidate", "Condition", "Dataset", "EnsembleSpec", "Hyperparameter",
    "PipelineEdge", "PipelineGraph", "PipelineNode", "RunHistory",
    "SearchSpace", "dataset_from_csv", "dataset_to_csv", "load_run_history",
    "merge_search_spaces", "pad_with_defaults", "serialize_run_history",
    "write_run_history",
    "RunLensError", "LoadError", "ValidationError", "NotFoundError",
    "MergeError", "UnsupportedPrimitiveError", "UnsupportedTopologyError",
    "InsufficientDataError", "DegenerateInputError",
    "MergedGraph", "build_cost_matrix", "hungarian", "merge", "snapshot",
    "FittedPipeline", "fit_candidate", "transform_until", "performance_report",
    "MISSING", "CpcAxisTree", "CandidatePolyline", "build_axes", "project",
    "brush", "sampling_history",
    "boundary_candidates", "distance", "distance_matrix", "embed",
    "fit_surface", "heatmap", "coverage_timelapse",
    "SurrogateTree", "LocalExplanation", "FeatureEffects", "ImportanceEntry",
    "ImportanceTable", "global_surrogate", "surrogate_from_json",
    "local_surrogate", "hp_importance", "hp_importance_from_configs",
    "partial_dependence", "feature_effects",
    "EnsembleMember", "ensemble_predict", "prediction_matrix",
    "decision_surface",
    "RunBundle", "RunRegistry", "AnalysisCache", "cache_key",
    "available_operations", "render", "available_artifacts", "export_artifact",
    "sanitize", "canonical_bytes", "parameter_hash",
    "simulate_random_search", "synthetic_dataset",
    "__version__",
]
