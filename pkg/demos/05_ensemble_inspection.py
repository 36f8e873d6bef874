"""
Inside the final ensemble
=========================

The run file names an ensemble: member ids and soft-vote weights.  Refit the
members, compare each one against the weighted vote, find the rows where
they disagree, and paint all of their decision boundaries over one shared
PCA plane.
"""

import numpy as np

from runlens import (EnsembleMember, decision_surface, ensemble_predict,
                     fit_candidate, prediction_matrix, simulate_random_search)
from runlens.engine.metrics import accuracy

history = simulate_random_search(run_id="demo", n_candidates=12, n_rows=200,
                                 seed=3, ensemble_size=3)
members = []
for candidate_id, weight in history.ensemble.members:
    fitted = fit_candidate(history.candidate(candidate_id), history.dataset,
                           seed=0)
    members.append(EnsembleMember(candidate_id, weight, fitted))
holdout = members[0].oracle.validation_data()

print("members:")
for m in members:
    labels = np.argmax(m.oracle.predict_proba(holdout), axis=1)
    print(f"  {m.candidate_id}  weight {m.weight:.3f}  "
          f"holdout accuracy {accuracy(holdout.y, labels):.3f}")

vote = ensemble_predict(members, holdout)
print(f"ensemble holdout accuracy {accuracy(holdout.y, vote.labels()):.3f}")

# row-by-row: where do the members disagree with the vote?
matrix = prediction_matrix(members, holdout)
disagree = [r for r in matrix["rows"] if len(set(r["members"].values())) > 1]
print()
print(f"{len(disagree)} of {len(matrix['rows'])} rows split the members")
for r in disagree[:3]:
    votes = ", ".join(f"{cid}={label}" for cid, label in r["members"].items())
    print(f"  row {r['row']:3d}  true={r['true']:<4s} {votes} "
          f"-> ensemble={r['ensemble']}")

# every member classifies the same 2-D grid through the same PCA plane
surfaces = decision_surface(members, holdout, resolution=32)
print()
print(f"decision surfaces on a {surfaces.resolution}x{surfaces.resolution} "
      f"grid, classes {list(surfaces.class_labels)}")
for surf in surfaces.surfaces:
    counts = np.bincount(np.asarray(surf["cells"], dtype=int).ravel())
    label = surfaces.class_labels[int(np.argmax(counts))]
    share = counts.max() / counts.sum()
    print(f"  {surf['owner']:<10s} paints '{label}' on {share:.0%} of the plane")
