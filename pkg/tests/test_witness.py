from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from krbootstrap import constants as C
from krbootstrap.closure import closure
from krbootstrap.graph import graph_from_edge_list, sample_gnp
from krbootstrap.twg import is_twg, ladder_twg, random_twg, twg_leaf, witnesses
from krbootstrap.witness import (
    COSTLY, INTR, TS, al_scan, classify_steps, excess, extract_rea, run_wga, tree_decomposition,
    witness_metrics,
)

# r = 5: step 3 merges two components sharing vertices 0 and 1 outside its copy
COSTLY_R_PLUS_2 = [
    (0, 1), (0, 2), (0, 4), (0, 5), (0, 8), (0, 9), (1, 2), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8),
    (2, 5), (2, 6), (2, 7), (2, 8), (3, 4), (3, 5), (3, 6), (3, 8), (3, 9), (4, 6), (4, 8), (4, 9),
    (5, 6), (5, 7), (5, 8), (6, 8), (8, 9),
]


def trace_of(edges, n, e, r=5):
    res = closure(graph_from_edge_list(n, edges), r)
    return res, extract_rea(run_wga(res), e)


def components_by_definition(trace, upto):
    """Vertex sets of the REA components before step ``upto``, merging on shared edges."""
    comps: list[tuple[set, set]] = []
    for s in trace.steps[:upto]:
        hv, he = set(s.clique), set(combinations(s.clique, 2))
        hit = [c for c in comps if c[1] & he]
        for c in hit:
            comps.remove(c)
            hv |= c[0]
            he |= c[1]
        comps.append((hv, he))
    return comps


def test_initial_edge_witness():
    res = closure(sample_gnp(30, 0.3, 1), 5)
    wa = run_wga(res)
    f = res.rounds[0][0]
    assert wa.witness(f) == {f} and wa.sigma(f) == 0


def test_one_step_witness():
    edges = [f for f in combinations(range(5), 2) if f != (0, 1)]
    res, tr = trace_of(edges, 5, (0, 1))
    wa = tr.assignment
    assert wa.witness((0, 1)) == set(edges) and wa.sigma((0, 1)) == 3
    assert excess(edges, (0, 1), 5) == 0
    assert tr.m == 1 and classify_steps(tr) == [(TS, 0)]


@given(st.sampled_from([5, 6]), st.integers(1, 5), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_twg_witness_is_the_twg(r, k, seed):
    t = random_twg(r, k, seed)
    n = max(t.vertices) + 1
    res, tr = trace_of(sorted(t.edges), n, (0, 1), r)
    assert tr.witness == set(t.edges)
    assert len(tr.witness) == C.lam(r) * (r - 2) * k + 1
    assert all(kind == TS for kind, _ in classify_steps(tr))
    m = witness_metrics(tr)
    assert (m.chi, m.kappa, m.tau, m.beta, m.omega) == (0, 0, 0, 0, 1)
    assert all(bad == 0 and parts == 1 for bad, parts in tree_decomposition(tr))


def test_tree_step_merging_two_components():
    t = twg_leaf(5, (0, 1)).graft((0, 1), (2, 3, 4)).graft((0, 2), (5, 6, 7)).graft((1, 3), (8, 9, 10))
    res, tr = trace_of(sorted(t.edges), 11, (0, 1))
    last = tr.steps[-1]
    assert last.kind == TS and len(last.merged) == 2 and last.cost == 0


def test_costly_step_cost_r_plus_2():
    res, tr = trace_of(COSTLY_R_PLUS_2, 10, (3, 7))
    kinds = [s.kind for s in tr.steps]
    assert kinds == [TS, TS, COSTLY, COSTLY, INTR]
    step = tr.steps[3]
    # by definition: V(H) plus the vertices outside H lying in two merged components
    comps = components_by_definition(tr, 3)
    hv = set(step.clique)
    he = set(combinations(step.clique, 2))
    merged = [c for c in comps if c[1] & he]
    assert len(merged) == 2
    twice = (merged[0][0] & merged[1][0]) - hv
    assert len(twice) == 2
    assert step.cost == len(hv | twice) == 5 + 2
    assert tr.metrics().chi >= Fraction(1, 3)


def test_intr_step_grows_bad_part_by_one_edge():
    res, tr = trace_of(COSTLY_R_PLUS_2, 10, (3, 7))
    before, after = tr.steps[3], tr.steps[4]
    assert after.kind == INTR and before.bad_size > 0
    assert after.bad_size == before.bad_size + 1
    assert after.num_parts == before.num_parts


def test_costly_step_compromises_parts():
    res, tr = trace_of(COSTLY_R_PLUS_2, 10, (3, 7))
    m = tr.metrics()
    assert m.tau == sum(s.compromised for s in tr.steps) > 0
    assert m.omega <= m.tau + 1 and m.beta <= m.costly_steps
    assert not is_twg(tr.witness, (3, 7), 5) and m.chi > 0


def test_first_step_is_tree_step():
    res = closure(sample_gnp(60, 0.3, 5), 5)
    wa = run_wga(res)
    for f in res.added_edges[:: max(1, res.num_added // 20)]:
        tr = extract_rea(wa, f)
        assert tr.steps[0].kind == TS and tr.steps[0].cost == 0


def test_records_shape():
    res, tr = trace_of(COSTLY_R_PLUS_2, 10, (3, 7))
    recs = tr.records()
    assert [r["index"] for r in recs] == list(range(1, 6))
    assert recs[-1]["metrics"]["kappa"] == tr.metrics().kappa
    assert set(recs[0]) == {"index", "clique", "red", "kind", "cost", "metrics"}


@given(st.integers(25, 70), st.floats(1.1, 2.5), st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_invariants_on_random_closures(n, scale, seed):
    r = 5
    res = closure(sample_gnp(n, min(1.0, scale * C.p_c(r, n)), seed), r)
    if not res.num_added:
        return
    wa = run_wga(res)
    added = res.added_edges
    for f in sorted({added[0], added[len(added) // 2], added[-1]}):
        assert witnesses(wa.witness(f), f, r)
        tr = extract_rea(wa, f)
        m = tr.metrics()
        assert m.chi >= 0
        assert (m.chi == 0) == is_twg(tr.witness, f, r)
        assert m.beta <= m.costly_steps
        if m.chi:
            assert m.omega <= m.tau + 1
        assert m.kappa == sum(c for _, c in classify_steps(tr))
    scan = al_scan(res, wa)
    assert scan.holds and scan.m[1] == r - 2


def test_al_scan_empty_and_factor():
    res = closure(sample_gnp(40, 0.01, 0), 5)
    assert al_scan(res, run_wga(res)).m == []
    res = closure(sample_gnp(80, 0.25, 3), 5)
    scan = al_scan(res, run_wga(res))
    assert scan.holds
    assert all(f is None or f <= math.comb(5, 2) for f in scan.factors)


def test_check_needs_r_ge_5():
    res = closure(sample_gnp(12, 0.45, 0), 4)
    wa = run_wga(res)
    with pytest.raises(ValueError):
        extract_rea(wa, res.added_edges[0], check=True)
    extract_rea(wa, res.added_edges[0], check=False)


def test_ladder_trace_all_tree_steps():
    t = ladder_twg(5, 3)
    res, tr = trace_of(sorted(t.edges), 11, (0, 1))
    assert classify_steps(tr) == [(TS, 0)] * 3
