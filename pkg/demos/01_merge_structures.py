"""
Watching pipeline structures merge over a run
=============================================

Every sampled pipeline folds into one merged DAG: matching nodes stack up
(their occurrence count grows), new primitives branch off as siblings.
"""

from runlens import simulate_random_search
from runlens.structure import SnapshotCache

history = simulate_random_search(run_id="demo", n_candidates=10, n_rows=150,
                                 seed=5)

# snapshots are cached per candidate timestamp, so scrubbing is cheap
snapshots = SnapshotCache(history)

print("frame  nodes  edges  longest path")
for t in snapshots.frame_times():
    merged = snapshots.at(t)
    print(f"{t:5.0f}  {len(merged.nodes):5d}  {len(merged.edges):5d}  "
          f"{merged.max_path_length():12d}")

final = snapshots.final()
print()
print("final merged graph, one line per node:")
for node in final.nodes:
    ids = ", ".join(sorted(node.members))
    print(f"  {node.primitive:<22} occurrence {node.occurrence:2d}  from [{ids}]")

# the DOT export is what the CLI's merge-graph command writes
dot = final.to_dot()
print()
print(f"DOT export is {len(dot.splitlines())} lines, starts with:")
print(" ", dot.splitlines()[0])
