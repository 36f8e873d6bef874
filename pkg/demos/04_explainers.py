"""
Explaining what a candidate learned
===================================

Four views on the same fitted pipeline: a global surrogate tree, a local
linear explanation for one row, hyperparameter importance across the whole
run, and per-feature effects (permutation importance plus partial
dependence).
"""

from runlens import (fit_candidate, feature_effects, global_surrogate,
                     hp_importance, local_surrogate, simulate_random_search)

history = simulate_random_search(run_id="demo", n_candidates=12, n_rows=200,
                                 seed=3)
best = max(history.fold_order(), key=lambda c: c.validation_performance or 0)
fitted = fit_candidate(best, history.dataset, seed=0)
holdout = fitted.validation_data()

print(f"explaining {best.candidate_id} "
      f"(stored validation score {best.validation_performance:.3f})")

# a small decision tree mimics the pipeline on its own holdout
tree = global_surrogate(fitted, holdout, max_leaf_nodes=8)
print()
print(f"global surrogate: {tree.tree.leaf_count()} leaves, "
      f"fidelity {tree.fidelity:.3f}")

# one row, one sparse linear model around it
explanation = local_surrogate(fitted, holdout, row_index=0, n_samples=1000,
                              seed=0)
print()
print(f"row 0 is predicted '{explanation.explained_class}' "
      f"(local fit {explanation.local_prediction:.3f})")
for name, weight in sorted(explanation.weights, key=lambda kv: -abs(kv[1]))[:4]:
    print(f"  {name:>28s}  {weight:+.4f}")

# which hyperparameters moved the needle across all twelve candidates?
table = hp_importance(history, seed=0)
print()
print(f"hyperparameter importance ({table.n_samples} scored configs):")
for entry in table.singles[:3]:
    print(f"  single  {entry.hyperparameters[0]:<42s} {entry.importance:.3f}")
for entry in table.pairs[:2]:
    names = " x ".join(entry.hyperparameters)
    print(f"  pair    {names:<42s} {entry.importance:.3f}")

# permutation importance and partial dependence on the raw features
effects = feature_effects(fitted, holdout, seed=0)
print()
print(f"feature effects (baseline accuracy {effects.baseline_accuracy:.3f}):")
for row in effects.permutation[:4]:
    print(f"  {row['feature']:>28s}  {row['importance']:+.4f}")
top = effects.permutation[0]["feature"]
effect = next(e for e in effects.effects if e["feature"] == top)
pdp = effect["pdp"][holdout.class_labels[-1]]
print(f"partial dependence of '{top}' sweeps "
      f"p({holdout.class_labels[-1]}) from {min(pdp):.3f} to {max(pdp):.3f}")
