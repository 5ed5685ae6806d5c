from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from krbootstrap import constants as C
from krbootstrap.closure import closure
from krbootstrap.graph import Graph, ResourceError, graph_from_edge_list, sample_gnp
from krbootstrap.render import (
    DARK_BLUE, WHITE, YELLOW, EdgeTimes, HeatmapSpec, color_stop_check, format_edge_times,
    heatmap_pixels, palette, read_ppm, render_heatmap, retrospective_vertex_order, symmetric,
    vertex_order,
)
from krbootstrap.verify import golden


def k5_minus_edge_plus_isolated():
    edges = [f for f in combinations(range(5), 2) if f != (0, 1)]
    return closure(graph_from_edge_list(6, edges), 5)


def test_goldens():
    assert render_heatmap(closure(Graph.empty(8), 5)) == golden("edgeless8.ppm")
    assert render_heatmap(closure(Graph.complete(8), 5)) == golden("complete8.ppm")
    img = read_ppm(golden("complete8.ppm"))
    assert tuple(img[0, 0]) == WHITE and tuple(img[0, 1]) == DARK_BLUE


def test_retro_order():
    res = k5_minus_edge_plus_isolated()
    # 2,3,4 see only initial edges; 0 and 1 average 1/4; 5 is isolated
    assert retrospective_vertex_order(res) == [2, 3, 4, 0, 1, 5]
    assert vertex_order(res, "id") == list(range(6))
    assert vertex_order(res, "degree")[-1] == 5


def test_last_round_is_yellow():
    res = k5_minus_edge_plus_isolated()
    img = heatmap_pixels(res, HeatmapSpec(order="id"))
    assert tuple(img[0, 1]) == YELLOW and tuple(img[0, 2]) == DARK_BLUE
    assert tuple(img[5, 0]) == WHITE


def test_palette_endpoints_and_midpoint():
    pal = palette(HeatmapSpec(), 2)
    assert tuple(pal[0]) == DARK_BLUE and tuple(pal[2]) == YELLOW
    mid = tuple(int(np.floor((a + b) / 2 + 0.5)) for a, b in zip(DARK_BLUE, YELLOW))
    assert tuple(pal[1]) == mid


def test_random_heatmap_properties():
    g = sample_gnp(120, 1.5 * C.p_c(5, 120), 4)
    res = closure(g, 5)
    a = render_heatmap(res)
    assert a == render_heatmap(closure(sample_gnp(120, 1.5 * C.p_c(5, 120), 4), 5))
    img = read_ppm(a)
    assert img.shape == (120, 120, 3)
    assert symmetric(img) and color_stop_check(img, HeatmapSpec())


def test_csv_roundtrip(tmp_path):
    res = closure(sample_gnp(40, 0.3, 1), 5)
    path = tmp_path / "t.csv"
    path.write_text(format_edge_times(res))
    et = EdgeTimes.from_csv(path)
    assert np.array_equal(et.labels, EdgeTimes.from_result(res).labels)
    assert render_heatmap(et) == render_heatmap(res)


def test_resource_errors():
    res = closure(sample_gnp(30, 0.2, 0), 5)
    with pytest.raises(ResourceError):
        heatmap_pixels(res, HeatmapSpec(size=10))
    with pytest.raises(ResourceError):
        heatmap_pixels(res, HeatmapSpec(size=50, cap=40))
    img = heatmap_pixels(res, HeatmapSpec(size=10, downsample=True))
    assert img.shape == (10, 10, 3) and symmetric(img)


def test_bad_spec():
    with pytest.raises(ValueError):
        HeatmapSpec(stops=(DARK_BLUE,))
    with pytest.raises(ValueError):
        HeatmapSpec(order="random")
