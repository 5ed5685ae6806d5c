from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from krbootstrap.closure import closure, is_stable
from krbootstrap.graph import Graph, graph_from_edge_list, sample_gnp
from krbootstrap.krtree import (
    KrTreeError, build_kr_tree, check_clique_claim, check_comparison, expansion_bound_check,
    format_kr_tree, kr_tree_from_cliques, ladder, parse_kr_tree, random_overlay, replay_check,
    rstar_bp, sample_random_kr_tree, spread_edges,
)


def test_build_two_cliques():
    t = build_kr_tree(5, [((0, 1), 3)])
    assert t.cliques == ((0, 1, 2, 3, 4), (0, 1, 5, 6, 7))
    assert t.shared == (None, (0, 1))
    assert len(t.vertices) == 8 and len(t.edges) == 2 * 10 - 1
    assert t.internal_edges == [(0, 1)]


def test_wrong_fresh_count_rejected_with_index():
    with pytest.raises(KrTreeError) as exc:
        build_kr_tree(5, [((0, 1), 3), ((0, 2), 2)])
    assert exc.value.index == 2


def test_sharing_three_vertices_rejected():
    with pytest.raises(KrTreeError) as exc:
        kr_tree_from_cliques(5, [range(5), (0, 1, 2, 5, 6)])
    assert exc.value.index == 1


def test_shared_pair_must_be_an_edge():
    with pytest.raises(KrTreeError) as exc:
        kr_tree_from_cliques(4, [(0, 1, 2, 3), (0, 1, 4, 5), (2, 4, 6, 7)])
    assert exc.value.index == 2 and "not an edge" in str(exc.value)


def test_ladder_shape():
    t = ladder(5, 4)
    assert t.order == 4 and len(t.vertices) == 5 + 3 * 3
    # consecutive shared edges are vertex-disjoint
    sh = [s for s in t.shared if s]
    assert all(not set(a) & set(b) for a, b in zip(sh, sh[1:]))
    assert (0, 1) not in sh


@given(st.integers(4, 8), st.integers(1, 25), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_random_tree_counts_and_stability(r, order, seed):
    t = sample_random_kr_tree(r, order, seed)
    assert len(t.vertices) == r + (order - 1) * (r - 2)
    assert len(t.edges) == order * (r * (r - 1) // 2) - (order - 1)
    if r >= 5:
        assert is_stable(t.to_graph(), r)
        assert check_clique_claim(t) == []


def test_kr_tree_roundtrip():
    t = sample_random_kr_tree(6, 7, 42)
    assert parse_kr_tree(format_kr_tree(t)) == t
    assert parse_kr_tree("# a comment\n5 1\n0 1 2 3 4  # H_1\n").cliques == ((0, 1, 2, 3, 4),)
    with pytest.raises(ValueError):
        parse_kr_tree("5 2\n0 1 2 3 4\n")


def test_usual_bp_fills_a_clique():
    t = build_kr_tree(5)
    assert rstar_bp(t, {0, 1, 2}).infected == t.vertices
    assert rstar_bp(t, {0, 1}).infected == {0, 1}


def test_special_step():
    t = build_kr_tree(5, [((0, 1), 3)])
    tr = rstar_bp(t, {2, 5})
    assert tr.events[0].kind == "special" and tr.events[0].internal_edge == (0, 1)
    assert tr.infected == t.vertices
    assert replay_check(t, tr) == []
    assert tr.log_lines()[0].startswith("1 special 0 edge=0,1")


def test_histogram_identity():
    t = sample_random_kr_tree(5, 20, 3)
    seeds = sorted(t.vertices)[::5]
    tr = rstar_bp(t, seeds)
    assert sum(tr.histogram.values()) == len(tr.infected) - len(tr.seeds)


def test_replay_catches_a_forged_trace():
    t = build_kr_tree(5)
    tr = rstar_bp(t, {0, 1, 2})
    tr.events[0].k = 99
    assert replay_check(t, tr)


@given(st.integers(5, 7), st.integers(1, 30), st.integers(0, 2**32), st.integers(0, 8))
@settings(max_examples=60, deadline=None)
def test_expansion_bound(r, order, seed, x):
    t = sample_random_kr_tree(r, order, seed)
    seeds = sorted(t.vertices)[: min(x, len(t.vertices))]
    size, bound, ok = expansion_bound_check(t, seeds)
    assert ok and bound == 10 + (4 * r + 5) * len(seeds)


def test_comparison_with_edgeless_graph():
    t = sample_random_kr_tree(5, 6, 1)
    rep = check_comparison(t, Graph.empty(max(t.vertices) + 1))
    assert rep.holds and rep.added == 0 and rep.spread == set() and rep.seeds == frozenset()


def test_comparison_with_clique_on_two_tree_vertices():
    t = build_kr_tree(5, [((0, 1), 3)])
    n = 13
    extra = [2, 6] + list(range(8, 13))
    g = graph_from_edge_list(n, combinations(extra, 2))
    rep = check_comparison(t, g)
    assert rep.holds and rep.seeds == {2, 6}


def test_disjoint_graph_spreads_nothing():
    t = sample_random_kr_tree(5, 4, 9)
    nt = max(t.vertices) + 1
    g = graph_from_edge_list(nt + 6, combinations(range(nt, nt + 6), 2))
    spread, ratio = spread_edges(t, g)
    assert spread == set() and ratio is None


@given(st.integers(5, 7), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_comparison_on_random_overlays(r, seed):
    t, g = random_overlay(r, 1 + seed % 15, seed % 5, 3 + seed % 20, 0.6, seed)
    rep = check_comparison(t, g)
    assert rep.holds, rep.violations
    assert replay_check(t, rstar_bp(t, rep.seeds)) == []


def test_overlay_closure_agrees_with_report():
    t, g = random_overlay(5, 10, 4, 15, 0.7, 5)
    rep = check_comparison(t, g)
    assert rep.added == closure(g.with_edges(t.edges), 5).num_added


def test_to_graph_fits():
    t = ladder(5, 2)
    with pytest.raises(ValueError):
        check_comparison(t, Graph.empty(3))
