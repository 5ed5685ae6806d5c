"""Counting tree witness graphs.

A k-TWG for the pair e is built by grafting k copies of K_r, each completing
one missing edge.  The number of labelled k-TWGs is a Fuss-Catalan number
times a multinomial factor; we check the formula against the recursion and
against brute-force enumeration, then look at the constants it produces.
"""
from __future__ import annotations

from krbootstrap import constants as C
from krbootstrap.twg import enumerate_twgs, is_twg, twg_count_formula, twg_count_recursive

for r in (5, 6):
    print(f"r={r}")
    for k in range(4 if r == 5 else 3):
        f = twg_count_formula(r, k)
        rec = twg_count_recursive(r, k)
        enum = len(enumerate_twgs(r, k)) if f < 300000 else None
        print(f"  k={k}: formula {f}, recursion {rec}, enumeration {enum}")

twgs = enumerate_twgs(5, 2)
print(f"every one of the {len(twgs)} graphs for r=5, k=2 is recognised as a TWG:",
      all(is_twg(t, (0, 1), 5) for t in twgs))

for r in range(5, 9):
    d = C.fc_degree(r)
    print(f"r={r}: d={d}, alpha_d={float(C.alpha(d)):.4f}, gamma={C.gamma(r):.6f}, "
          f"residual {C.gamma_residual(r):.1e}")
