"""Following one added edge back to its witness.

The graph below (r=5, ten vertices) is closed under K_5-completion.  The pair
(3, 7) is added last.  Replaying the red edge algorithm shows two tree steps,
then two costly steps (the second merges two components that overlap in two
vertices outside its copy, costing r + 2 = 7), then an internal step.
"""
from __future__ import annotations

from krbootstrap.closure import closure
from krbootstrap.graph import graph_from_edge_list
from krbootstrap.twg import is_twg
from krbootstrap.witness import extract_rea, run_wga

EDGES = [
    (0, 1), (0, 2), (0, 4), (0, 5), (0, 8), (0, 9), (1, 2), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8),
    (2, 5), (2, 6), (2, 7), (2, 8), (3, 4), (3, 5), (3, 6), (3, 8), (3, 9), (4, 6), (4, 8), (4, 9),
    (5, 6), (5, 7), (5, 8), (6, 8), (8, 9),
]

res = closure(graph_from_edge_list(10, EDGES), 5)
print(f"{len(EDGES)} initial edges, {res.num_added} added over {res.num_rounds} rounds")
trace = extract_rea(run_wga(res), (3, 7))
for s in trace.steps:
    print(f"step {s.index + 1}: copy {s.clique}, red {s.red}, {s.kind}, cost {s.cost}, merged {s.merged}")
m = trace.metrics()
print(f"witness: {len(trace.witness)} edges, excess {m.chi}, cost {m.kappa}, "
      f"compromised parts {m.tau}, maximal tree parts {m.omega}")
print("witness is a TWG:", is_twg(trace.witness, (3, 7), 5))
