from __future__ import annotations

import math
from itertools import combinations

import pytest

from krbootstrap import constants as C
from krbootstrap.experiments import (
    ExperimentConfig, al_experiment, census_expectation, census_experiment,
    edge_expansion_experiment, percolation_sweep, scaled_coordinate, scaled_to_p, twg_census,
)
from krbootstrap.graph import Graph, graph_from_edge_list, sample_gnp
from krbootstrap.twg import enumerate_twgs, random_twg


def brute_census(g: Graph, r: int, k: int) -> int:
    """Count (target, k-TWG) pairs with every TWG edge present in G."""
    present = set(g.edges())
    found = set()
    for e in combinations(range(g.n), 2):
        rest = [v for v in range(g.n) if v not in e]
        for sub in combinations(rest, (r - 2) * k):
            for es in enumerate_twgs(r, k, labels=sorted(e + sub), e=e):
                if set(es) <= present:
                    found.add(frozenset(es))
    return len(found)


def test_scaled_roundtrip():
    p = scaled_to_p(5, 1000, 2.0)
    assert math.isclose(scaled_coordinate(5, 1000, p), 2.0)


def test_sweep_extremes():
    cfg = ExperimentConfig(5, 30, (0.0, 1.0), 3, 7)
    res = percolation_sweep(cfg)
    assert [row.fraction for row in res.rows] == [0.0, 1.0]
    assert res.rows[1].mean_final_edges == 30 * 29 / 2


def test_coupled_sweep_is_monotone():
    grid = tuple(scaled_to_p(5, 120, s) for s in (0.3, 0.8, 1.5, 3.0, 6.0))
    res = percolation_sweep(ExperimentConfig(5, 120, grid, 12, 3))
    assert res.monotone_per_trial()
    fr = [row.fraction for row in res.rows]
    assert fr == sorted(fr)


def test_sweep_csv_is_deterministic(tmp_path):
    grid = (0.2, 0.4)
    a = percolation_sweep(ExperimentConfig(5, 40, grid, 4, 11, threads=1, out=str(tmp_path / "a.csv")))
    b = percolation_sweep(ExperimentConfig(5, 40, grid, 4, 11, threads=2, out=str(tmp_path / "b.csv")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.csv_text.startswith("# krbootstrap sweep schema=1 config=")
    c = percolation_sweep(ExperimentConfig(5, 40, grid, 4, 12))
    assert c.csv_text.splitlines()[0] != a.csv_text.splitlines()[0]


def test_uncoupled_sweep_runs():
    res = percolation_sweep(ExperimentConfig(5, 30, (0.1, 0.9), 3, 1, coupled=False))
    assert res.rows[1].fraction == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(5, 30, (1.5,))
    with pytest.raises(ValueError):
        ExperimentConfig(5, 30, (0.5,), trials=0)
    with pytest.raises(ValueError):
        percolation_sweep(ExperimentConfig(5, 30))


@pytest.mark.parametrize("r,n,p,seed", [(4, 9, 0.6, 0), (4, 10, 0.5, 1), (5, 8, 0.7, 2), (5, 9, 0.75, 3)])
def test_census_matches_brute_force(r, n, p, seed):
    g = sample_gnp(n, p, seed)
    res = twg_census(g, r, 2)
    assert not res.truncated
    assert res.counts[0] == g.edge_count
    assert res.counts[1] == brute_census(g, r, 1)
    assert res.counts[2] == brute_census(g, r, 2)


def test_census_x1_by_common_neighbourhoods():
    r = 5
    g = sample_gnp(14, 0.6, 4)
    want = 0
    for k in combinations(range(g.n), r - 2):
        if all(g.has_edge(a, b) for a, b in combinations(k, 2)):
            common = [v for v in range(g.n) if v not in k and all(g.has_edge(v, x) for x in k)]
            want += math.comb(len(common), 2)
    assert twg_census(g, r, 1).counts[1] == want


def test_census_finds_an_embedded_twg():
    t = random_twg(5, 2, 9)
    g = graph_from_edge_list(max(t.vertices) + 1, t.edges)
    assert twg_census(g, 5, 2).counts[2] >= 1


def test_census_budget_truncates():
    res = twg_census(Graph.complete(12), 5, 2, node_budget=10)
    assert res.truncated


def test_census_expectation_small_cases():
    assert census_expectation(5, 10, 0.5, 0) == pytest.approx(45 * 0.5)
    lam = C.lam(5)
    want = math.comb(10, 2) * math.comb(8, 3) * 0.5 ** int(lam * 3 + 1)
    assert census_expectation(5, 10, 0.5, 1) == pytest.approx(want)


def test_census_experiment_agrees():
    s = census_experiment(5, 40, 0.35, 60, 5)
    assert s.within and s.truncated == 0


def test_expansion_ratio_at_least_one():
    s = edge_expansion_experiment(5, 200, 1.3 * C.gamma(5), 3, 2)
    assert all(x >= 1.0 for x in s.ratios)
    assert "diagnostic" in s.report() or s.caveat


def test_al_experiment(tmp_path):
    cfg = ExperimentConfig(5, 60, (0.3,), 3, 8, out=str(tmp_path / "al.csv"))
    trajs, text = al_experiment(cfg)
    assert len(trajs) == 3 and all(t.holds for t in trajs)
    for t in trajs:
        if len(t.m) > 1:
            assert t.m[1] == 3
    assert text.splitlines()[1] == "point,trial,p,round,m,factor"
