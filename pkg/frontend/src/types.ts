/**
 * Response document shapes for the analytics service.
 *
 * These mirror the JSON rendered by the backend operations one to one.
 * The UI never derives numbers of its own; everything displayed comes
 * out of one of these documents, so the fields here are the full
 * vocabulary of what can appear on screen.
 */

// --- service index and run listing ---

export interface IndexDoc {
  service: string;
  runs: string[];
  operations: string[];
  artifacts: string[];
}

export interface RunSummary {
  run_id: string;
  task: string;
  metric_name: string;
  n_candidates: number;
  n_scored: number;
  ensemble_available: boolean;
}

export interface RunsDoc {
  runs: RunSummary[];
}

// --- overview ---

export interface TimelineEntry {
  candidate_id: string;
  timestamp: number;
  train_performance: number | null;
  validation_performance: number | null;
  incumbent: boolean;
}

export interface ColumnInfo {
  name: string;
  kind: string;
}

export interface OverviewDoc {
  run: { run_id: string; task: string; metric_name: string };
  dataset: {
    n_rows: number;
    n_features: number;
    target: string;
    class_labels: string[];
    columns: ColumnInfo[];
  };
  n_candidates: number;
  n_scored: number;
  total_fit_duration: number;
  ensemble_available: boolean;
  best: {
    candidate_id: string;
    validation_performance: number;
    timestamp: number;
  } | null;
  timeline: TimelineEntry[];
}

// --- leaderboard ---

export interface LeaderboardRow {
  rank: number;
  candidate_id: string;
  validation_performance: number | null;
  train_performance: number | null;
  fit_duration: number | null;
  predict_duration: number | null;
  n_steps: number;
  primitives: string[];
  budget: number | null;
  timestamp: number;
}

export interface LeaderboardDoc {
  metric_name: string;
  rows: LeaderboardRow[];
}

// --- per-candidate report ---

export interface PipelineNodeDoc {
  id: string;
  primitive: string;
  config_prefix: string;
}

export interface PipelineEdgeDoc {
  from: string;
  to: string;
}

export interface PipelineDoc {
  nodes: PipelineNodeDoc[];
  edges: PipelineEdgeDoc[];
}

export interface RocCurveDoc {
  label: string;
  fpr: number[];
  tpr: number[];
  thresholds: number[];
}

export interface ClassMetricsDoc {
  label: string;
  precision: number;
  recall: number;
  support: number;
  auc: number | null;
}

export interface ReportDoc {
  candidate_id: string;
  timestamp: number;
  budget: number | null;
  stored: {
    train_performance: number | null;
    validation_performance: number | null;
    fit_duration: number | null;
    predict_duration: number | null;
  };
  metrics: {
    train_accuracy: number;
    validation_accuracy: number;
    confusion: number[][];
    classes: ClassMetricsDoc[];
    roc: RocCurveDoc[];
  };
  pipeline: PipelineDoc;
}

export interface ConfigDoc {
  candidate_id: string;
  timestamp: number;
  config: Record<string, string | number | boolean>;
}

// --- surrogate trees ---

export interface TreeSplitDoc {
  type: "split";
  feature: string;
  missing: "left" | "right";
  left: TreeNodeDoc;
  right: TreeNodeDoc;
  threshold?: number;
  category?: string;
}

export interface TreeLeafDoc {
  type: "leaf";
  probabilities: Record<string, number>;
  n: number;
}

export type TreeNodeDoc = TreeSplitDoc | TreeLeafDoc;

export interface SurrogateDoc {
  candidate_id: string;
  features: string[];
  classes: string[];
  max_leaf_nodes: number;
  n_leaves: number;
  fidelity: number;
  tree: TreeNodeDoc;
}

export interface LocalSurrogateDoc {
  candidate_id: string;
  row_index: number;
  instance: Record<string, string | number | null>;
  true_label: string;
  instance_probabilities: Record<string, number>;
  explained_class: string;
  local_prediction: number;
  intercept: number;
  kernel_width: number;
  n_samples: number;
  weights: { feature: string; weight: number }[];
}

// --- feature effects ---

export interface PermutationEntryDoc {
  feature: string;
  importance: number;
  sd: number;
}

export interface EffectDoc {
  feature: string;
  kind: string;
  grid: (number | string)[];
  pdp: Record<string, number[]>;
  ice: Record<string, number[][]>;
}

export interface EffectsDoc {
  candidate_id: string;
  classes: string[];
  baseline_accuracy: number;
  n_repeats: number;
  grid_size: number;
  permutation: PermutationEntryDoc[];
  effects: EffectDoc[];
}

// --- intermediate data ---

export interface IntermediateDoc {
  candidate_id: string;
  node: string;
  columns: ColumnInfo[];
  n_rows: number;
  rows: (string | number | null)[][];
  target: { name: string; values: string[] };
}

// --- structure graph time lapse ---

export interface StructureNodeDoc {
  id: string;
  primitive: string;
  layer: number;
  occurrence: number;
  members: string[];
}

export interface StructureEdgeDoc {
  from: string;
  to: string;
  columns: string[];
}

export interface StructureGraphDoc {
  at: number | null;
  frame_times: number[];
  nodes: StructureNodeDoc[];
  edges: StructureEdgeDoc[];
}

// --- hierarchical parallel coordinates ---

export interface HpConditionDoc {
  parent: string;
  value: string | number | boolean;
}

/** A hyperparameter axis; numeric kinds carry bounds, categorical carries choices. */
export interface HpAxisDoc {
  axis_id: string;
  kind: "hyperparameter";
  name: string;
  label: string;
  hp_kind: "categorical" | "numeric-integer" | "numeric-continuous";
  children: HpAxisDoc[];
  condition?: HpConditionDoc;
  choices?: string[];
  lower?: number;
  upper?: number;
  log_scale?: boolean;
}

export interface AlgorithmAxisDoc {
  axis_id: string;
  kind: "algorithm";
  label: string;
  node: string;
  occurrence: number;
  primitive: string;
  hyperparameters: HpAxisDoc[];
}

export interface StepAxisDoc {
  axis_id: string;
  kind: "step";
  label: string;
  layer: number;
  choices: string[];
  lane: unknown[];
  algorithms: AlgorithmAxisDoc[];
  hyperparameters: HpAxisDoc[];
}

export interface CpcStepDoc {
  layer: number;
  lanes: StepAxisDoc[];
}

/** One polyline vertex; axes a candidate does not touch are flagged missing. */
export type CoordinateDoc =
  | { axis: string; position: number; value: string | number }
  | { axis: string; missing: true };

export interface PolylineDoc {
  candidate_id: string;
  validation_performance: number | null;
  coordinates: CoordinateDoc[];
}

export interface CpcDoc {
  steps: CpcStepDoc[];
  global: HpAxisDoc[];
  polylines: PolylineDoc[];
}

// --- sampling history ---

export interface SamplingPointDoc {
  timestamp: number;
  value: string | number;
  performance: number | null;
}

export interface SamplingDoc {
  hyperparameter: string;
  kind: "categorical" | "numeric-integer" | "numeric-continuous";
  log_scale: boolean;
  points: SamplingPointDoc[];
  histogram:
    | { edges: number[]; counts: number[] }
    | { choices: string[]; counts: number[] };
}

// --- coverage embedding ---

export interface CoveragePointDoc {
  id: string;
  kind: "candidate" | "boundary";
  x: number;
  y: number;
  performance: number | null;
  timestamp: number | null;
}

export interface CoverageHeatmapDoc {
  resolution: number;
  values: number[][];
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}

export interface CoverageDoc {
  at: number | null;
  frame_times: number[];
  boundary_skipped: number;
  points: CoveragePointDoc[];
  heatmap: CoverageHeatmapDoc | null;
}

// --- hyperparameter importance ---

export interface ImportanceEntryDoc {
  hyperparameters: string[];
  importance: number;
  marginal: {
    grid?: (string | number)[];
    values?: number[];
    joint_importance?: number;
  };
}

export interface HpImportanceDoc {
  structure_of: string;
  n_samples: number;
  n_trees: number;
  singles: ImportanceEntryDoc[];
  pairs: ImportanceEntryDoc[];
}

// --- ensemble ---

export interface EnsembleMemberDoc {
  candidate_id: string;
  weight: number;
  stored_validation_performance: number | null;
  validation_accuracy: number | null;
}

// ensemble documents carry only {available: false} when no ensemble exists

export interface EnsembleOverviewDoc {
  available: boolean;
  warnings?: string[];
  class_labels?: string[];
  ensemble_validation_accuracy?: number | null;
  members?: EnsembleMemberDoc[];
}

export interface EnsemblePredictionRowDoc {
  row: number;
  true: string;
  ensemble: string;
  members: Record<string, string>;
}

export interface EnsemblePredictionsDoc {
  available: boolean;
  warnings?: string[];
  failed?: string[];
  columns?: string[];
  weights?: Record<string, number>;
  rows?: EnsemblePredictionRowDoc[];
}

export interface EnsembleSurfaceDoc {
  owner: string;
  cells: number[][];
}

export interface EnsembleSurfacePointDoc {
  x: number;
  y: number;
  label: string;
}

export interface EnsembleSurfacesDoc {
  available: boolean;
  warnings?: string[];
  classes?: string[];
  resolution?: number;
  x_min?: number;
  x_max?: number;
  y_min?: number;
  y_max?: number;
  points?: EnsembleSurfacePointDoc[];
  surfaces?: EnsembleSurfaceDoc[];
}

// --- error envelope ---

export interface ErrorEnvelope {
  error: { type: string; message: string };
}
