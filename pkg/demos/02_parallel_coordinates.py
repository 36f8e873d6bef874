"""
Hierarchical parallel coordinates and brushing
==============================================

Axes come in three levels: pipeline steps, the algorithms inside a step, and
each algorithm's hyperparameters. Brushing an axis keeps only the candidates
whose polyline passes through the brushed interval.
"""

from runlens import simulate_random_search
from runlens.cpc import MISSING, brush, build_axes, project, sampling_history
from runlens.structure import SnapshotCache

history = simulate_random_search(run_id="demo", n_candidates=10, n_rows=150,
                                 seed=5)
axes = build_axes(SnapshotCache(history).final(), history.merged_space())


def show(axis, depth=0):
    marker = "." if axis.holds_coordinates else "*"
    print(f"  {'  ' * depth}{marker} {axis.axis_id}")
    for child in axis.children:
        show(child, depth + 1)


print("axis tree (. carries coordinates, * only groups):")
for step in axes.steps:
    show(step)
for axis in axes.global_axes:
    show(axis)

# every candidate becomes one polyline over the coordinate axes
line = project(history.candidate("c001"), axes)
print()
print(f"candidate c001 touches {line.non_missing_count()} of "
      f"{len(line.coordinates)} coordinate axes, for example:")
for axis_id, value, position in line.coordinates[:5]:
    shown = "missing" if value is MISSING else f"{value} -> {position:.2f}"
    print(f"  {axis_id:<34} {shown}")

# brush: keep candidates whose max_depth landed in the upper half
candidates = history.fold_order()
kept = brush(axes, candidates, {"hp:classifier:max_depth": {"min": 6}})
print()
print("deep-tree candidates:", sorted(kept) or "(none)")

# predicates combine as a conjunction, every axis must match
kept = brush(axes, candidates, {
    "hp:classifier:max_depth": {"min": 6},
    "hp:scaler:algorithm": {"choices": ["min-max-scaler"]},
})
print("...that also scale to [0, 1]:", sorted(kept) or "(none)")

# when was the hyperparameter sampled where, and what did it score?
series = sampling_history(history, "classifier:max_depth")
print()
print(f"max_depth was sampled {len(series.points)} times; domain histogram "
      f"({len(series.counts)} bins) counts: {series.counts}")
