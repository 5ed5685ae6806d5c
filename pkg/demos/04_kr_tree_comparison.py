"""K_r-trees, (r-2)*-bootstrap percolation and the comparison check.

A K_r-tree is glued from cliques that each share one edge with the union so
far.  Laying a graph G over it, the closure of G + T can only spread through
the vertices that (r-2)*-BP infects from the tree vertices G touches.
"""
from __future__ import annotations

from krbootstrap.closure import is_stable
from krbootstrap.krtree import (
    build_kr_tree, check_comparison, expansion_bound_check, random_overlay, rstar_bp,
    sample_random_kr_tree,
)

t = build_kr_tree(5, [((0, 1), 3)])
trace = rstar_bp(t, {2, 5})
print("two K_5 on the edge 0-1, seeds {2, 5}:")
for line in trace.log_lines():
    print("  " + line)

big = sample_random_kr_tree(6, 25, seed=7)
print(f"random K_6-tree with {big.order} cliques on {len(big.vertices)} vertices, stable:",
      is_stable(big.to_graph(), 6))
seeds = sorted(big.vertices)[:5]
size, bound, ok = expansion_bound_check(big, seeds)
print(f"5 seeds infect {size} vertices (bound {bound})")

fails = 0
for i in range(100):
    tree, g = random_overlay(5, 1 + i % 12, i % 5, 10, 0.6, seed=i)
    fails += not check_comparison(tree, g).holds
print(f"100 random overlays, comparison failures: {fails}")
