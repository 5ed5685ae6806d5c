from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from krbootstrap.graph import (
    Graph, GraphError, ResourceError, check_size, common_neighbors, format_edge_list,
    graph_from_edge_list, graph_from_weights, pair_weights, parse_edge_list, read_edge_list,
    sample_gnp, sample_gnp_naive, write_edge_list,
)


def test_edge_list_construction():
    assert graph_from_edge_list(3, [(0, 1), (1, 2)]).edge_count == 2
    assert graph_from_edge_list(3, [(0, 1), (1, 0)]).edge_count == 1
    with pytest.raises(GraphError):
        graph_from_edge_list(2, [(0, 2)])
    with pytest.raises(GraphError):
        graph_from_edge_list(3, [(1, 1)])


def test_sample_extremes():
    assert sample_gnp(100, 0.0, 1).edge_count == 0
    assert sample_gnp(100, 1.0, 1) == Graph.complete(100)
    with pytest.raises(GraphError):
        sample_gnp(10, 1.5, 0)


def test_sample_edge_count_within_five_sd():
    n, p = 1000, 0.01
    mean = math.comb(n, 2) * p
    sd = math.sqrt(mean * (1 - p))
    for seed in range(3):
        assert abs(sample_gnp(n, p, seed).edge_count - mean) <= 5 * sd


def test_common_neighbors():
    k4 = Graph.complete(4)
    assert common_neighbors(k4, 0, 1) == (1 << 2) | (1 << 3)
    assert common_neighbors(Graph.empty(4), 0, 1) == 0
    path = graph_from_edge_list(3, [(0, 1), (1, 2)])
    assert common_neighbors(path, 0, 2) == 1 << 1


@given(st.integers(2, 60), st.floats(0.0, 1.0), st.integers(0, 2**64 - 1))
@settings(max_examples=60, deadline=None)
def test_symmetry(n, p, seed):
    g = sample_gnp(n, p, seed)
    a = g.adjacency_matrix()
    assert (a == a.T).all() and not a.diagonal().any()
    assert a.sum() == 2 * g.edge_count


@given(st.integers(2, 40), st.floats(0.0, 1.0), st.integers(0, 2**64 - 1))
@settings(max_examples=40, deadline=None)
def test_weights_agree_with_naive_stream(n, p, seed):
    assert graph_from_weights(n, pair_weights(n, seed), p) == sample_gnp_naive(n, p, seed)


def test_coupled_sampling_is_nested():
    w = pair_weights(80, 3)
    gs = [graph_from_weights(80, w, p) for p in (0.05, 0.1, 0.3)]
    assert gs[0].is_subgraph_of(gs[1]) and gs[1].is_subgraph_of(gs[2])


def test_skipping_matches_naive_in_distribution():
    scipy_stats = pytest.importorskip("scipy.stats")
    n, p, trials = 30, 0.1, 1500
    a = np.array([sample_gnp(n, p, s).edge_count for s in range(trials)])
    b = np.array([sample_gnp_naive(n, p, 10**6 + s).edge_count for s in range(trials)])
    bins = [0, 33, 38, 42, 46, 50, 55, 10**9]
    ca, _ = np.histogram(a, bins)
    cb, _ = np.histogram(b, bins)
    _, pval, _, _ = scipy_stats.chi2_contingency(np.vstack([ca, cb]))
    assert pval > 0.001


def test_edge_list_roundtrip(tmp_path):
    g = sample_gnp(30, 0.2, 9)
    text = format_edge_list(g)
    assert parse_edge_list(text) == g
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    assert path.read_text() == text
    assert read_edge_list(path) == g


def test_edge_list_errors():
    with pytest.raises(GraphError):
        parse_edge_list("")
    with pytest.raises(GraphError):
        parse_edge_list("3 2\n0 1\n")
    with pytest.raises(GraphError):
        parse_edge_list("3 1\n0 x\n")
    assert parse_edge_list("# c\n3 1\n0 1 # tail\n").edge_count == 1


def test_size_cap():
    with pytest.raises(ResourceError):
        check_size(1 << 21)
