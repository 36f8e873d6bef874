"""
Search-space coverage as a time-lapse embedding
===============================================

Sampled configurations and the search-space boundary drop into one 2-D map:
pairwise config distances feed classical MDS, a k-nearest-neighbor surface
interpolates performance between the scored points.
"""

import numpy as np

from runlens import distance, distance_matrix, simulate_random_search
from runlens.coverage import boundary_candidates, coverage_timelapse
from runlens.model import pad_with_defaults

history = simulate_random_search(run_id="demo", n_candidates=10, n_rows=150,
                                 seed=5)
space = history.merged_space()

# the metric wants complete configs, so inactive names get their defaults
a = pad_with_defaults(history.candidate("c001").config, space)
b = pad_with_defaults(history.candidate("c002").config, space)
print(f"d(c001, c002) = {distance(a, b, space):.4f}")
print(f"d(c001, c001) = {distance(a, a, space):.4f}")

configs = [pad_with_defaults(c.config, space) for c in history.fold_order()]
dm = distance_matrix(configs, space)
print(f"distance matrix: {dm.shape}, symmetric: {np.allclose(dm, dm.T)}")

# boundary probes mark where the space ends
print()
corners = boundary_candidates(space)
print(f"{len(corners.configs)} boundary configurations probe the extreme "
      "corners")

# scrub the time lapse: same coordinates per point in every frame
for t in (2.0, 5.0, float("inf")):
    frame = coverage_timelapse(history, t)
    sampled = [p for p in frame.points if p.kind == "candidate"]
    label = "final" if t == float("inf") else f"t={t:.0f} "
    surface = "with surface" if frame.surface is not None else "no surface yet"
    print(f"  {label}  {len(sampled):2d} candidates visible, {surface}")

final = coverage_timelapse(history, float("inf"))
best = max((p for p in final.points if p.performance is not None),
           key=lambda p: p.performance)
print()
print(f"best candidate {best.point_id} sits at ({best.x:+.3f}, {best.y:+.3f})")
hm = final.heatmap
print(f"heatmap: {len(hm.values)}x{len(hm.values[0])} cells spanning "
      f"x [{hm.x_min:+.3f}, {hm.x_max:+.3f}], y [{hm.y_min:+.3f}, {hm.y_max:+.3f}]")
