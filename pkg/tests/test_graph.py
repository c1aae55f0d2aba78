import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_pairs_relaxation, edge_filter_oracle, random_connected_graph
from sprkit.graph import (
    GraphError,
    ParseError,
    WeightedGraph,
    ball,
    format_graph_text,
    induced_subgraph,
    parse_graph_text,
    shortest_paths,
    subdivide_edges,
)

REL = 1e-9


def test_build_rejects_bad_edges():
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 0, 1.0)], [0])
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 1, -2.0)], [0])
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 1, 1.0), (1, 0, 2.0)], [0])
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 1, float("inf"))], [0])
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 1, 1.0)], [2])
    with pytest.raises(GraphError):
        WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0, 0])


def test_single_edge_distance():
    g = WeightedGraph.build([0, 1], [(0, 1, 2.5)], [0])
    dm = shortest_paths(g, 0)
    assert dm.distance(1) == 2.5
    assert dm.distance(0) == 0.0


def test_source_distance_is_zero():
    g = random_connected_graph(15, 3, seed=1, extra_edges=5)
    for v in g.vertices:
        assert shortest_paths(g, v).distance(v) == 0.0


def test_unknown_source_raises():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0])
    with pytest.raises(GraphError):
        shortest_paths(g, 9)


def test_distances_match_relaxation_oracle():
    g = random_connected_graph(20, 4, seed=7, extra_edges=15)
    oracle = all_pairs_relaxation(g)
    for src in g.vertices:
        dm = shortest_paths(g, src)
        for v in g.vertices:
            assert dm.distance(v) == pytest.approx(oracle[src][v], rel=REL)


def test_canonical_paths_deterministic_and_tie_broken():
    # two equal-length routes 0->3; canonical path must prefer the lower ids
    g = WeightedGraph.build(
        [0, 1, 2, 3],
        [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
        [0, 3],
    )
    dm = shortest_paths(g, 0)
    assert dm.path_to(3) == [0, 1, 3]
    assert dm.path_to(3) == shortest_paths(g, 0).path_to(3)


def test_unreachable_is_flagged_not_infinite():
    g = WeightedGraph.build([0, 1, 2], [(0, 1, 1.0)], [0])
    dm = shortest_paths(g, 0)
    assert not dm.reachable(2)
    with pytest.raises(GraphError):
        dm.distance(2)


def test_ball_on_path():
    g = WeightedGraph.build([0, 1, 2], [(0, 1, 1.0), (1, 2, 1.0)], [0])
    assert ball(g, 0, 1.5) == {0, 1}
    assert ball(g, 0, 0.0) == {0}
    assert ball(g, 1, 1.0) == {0, 1, 2}  # inclusive boundary


def test_ball_radius_reaches_component():
    g = random_connected_graph(18, 2, seed=3, extra_edges=6)
    dm = shortest_paths(g, 0)
    diameter = max(dm.distance(v) for v in g.vertices)
    assert ball(g, 0, diameter) == set(g.vertices)
    assert ball(g, 0, diameter) == {v for v in g.vertices if dm.distance(v) <= diameter}


def test_ball_negative_radius():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0])
    with pytest.raises(GraphError):
        ball(g, 0, -0.1)


def test_induced_subgraph_identity():
    g = random_connected_graph(12, 3, seed=5, extra_edges=4)
    h = induced_subgraph(g, g.vertices)
    assert h.edges == g.edges
    assert h.terminals == g.terminals


def test_induced_subgraph_triangle():
    g = WeightedGraph.build([0, 1, 2], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], [0, 1])
    h = induced_subgraph(g, {0, 1})
    assert h.edges == ((0, 1, 1.0),)


def test_induced_subgraph_matches_filter_oracle():
    g = random_connected_graph(24, 4, seed=9, extra_edges=20)
    keep = set(list(g.vertices)[::2]) | {g.terminals[0]}
    h = induced_subgraph(g, keep)
    assert list(h.edges) == edge_filter_oracle(g, keep)
    assert h.terminals == tuple(t for t in g.terminals if t in keep)


def test_subdivide_boundary_weight_unchanged():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0])
    res = subdivide_edges(g, 1.0)
    assert res.graph.edges == g.edges
    assert res.host_edge == {}


def test_subdivide_four_equal_segments():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0])
    res = subdivide_edges(g, 0.3)
    assert len(res.graph.edges) == 4  # ceil(1.0 / 0.3)
    for _, _, w in res.graph.edges:
        assert w == 0.25
    assert set(res.host_edge.values()) == {(0, 1)}
    # fresh vertices are degree two and not terminals
    for v in res.host_edge:
        assert len(res.graph.adjacency[v]) == 2
        assert v not in res.graph.terminals


def test_subdivide_preserves_distances():
    g = random_connected_graph(14, 3, seed=13, extra_edges=6, weight_range=(0.2, 2.0))
    oracle = all_pairs_relaxation(g)
    res = subdivide_edges(g, 0.35)
    for src in g.vertices:
        dm = shortest_paths(res.graph, src)
        for v in g.vertices:
            assert dm.distance(v) == pytest.approx(oracle[src][v], rel=REL)


def test_subdivide_rejects_bad_threshold():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0])
    with pytest.raises(GraphError):
        subdivide_edges(g, 0.0)
    with pytest.raises(GraphError):
        subdivide_edges(g, -1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=4, max_value=14))
def test_triangle_inequality_sampled(seed, n):
    g = random_connected_graph(n, 2, seed=seed, extra_edges=n // 2)
    maps = {v: shortest_paths(g, v) for v in g.vertices}
    verts = list(g.vertices)
    for u in verts[:5]:
        for v in verts[:5]:
            for w in verts[:5]:
                duv = maps[u].distance(v)
                duw = maps[u].distance(w)
                dwv = maps[w].distance(v)
                assert duv <= (duw + dwv) * (1 + REL)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=10**6),
    st.floats(min_value=0.05, max_value=1.5, allow_nan=False),
)
def test_subdivision_distance_preservation_property(seed, threshold):
    g = random_connected_graph(8, 2, seed=seed, extra_edges=3, weight_range=(0.1, 2.0))
    res = subdivide_edges(g, threshold)
    oracle = all_pairs_relaxation(g)
    dm = shortest_paths(res.graph, g.terminals[0])
    for v in g.vertices:
        assert dm.distance(v) == pytest.approx(oracle[g.terminals[0]][v], rel=REL)


def test_determinism_bit_for_bit():
    g1 = random_connected_graph(16, 3, seed=21, extra_edges=8)
    g2 = random_connected_graph(16, 3, seed=21, extra_edges=8)
    assert g1.edges == g2.edges
    d1 = shortest_paths(g1, 0)
    d2 = shortest_paths(g2, 0)
    assert d1.dist == d2.dist
    assert d1.pred == d2.pred


# --- text format ---------------------------------------------------------


def test_text_roundtrip():
    g = random_connected_graph(10, 3, seed=2, extra_edges=4)
    text = format_graph_text(g)
    h = parse_graph_text(text)
    assert h.vertices == g.vertices
    assert h.edges == g.edges
    assert h.terminals == g.terminals
    assert format_graph_text(h) == text


def test_text_comments_and_labels():
    text = "# demo\nv 0 root\nv 1\nt 0\ne 0 1 2.5  # trailing comment\n"
    g = parse_graph_text(text)
    assert g.labels[0] == "root"
    assert g.edges == ((0, 1, 2.5),)


@pytest.mark.parametrize(
    "text, line",
    [
        ("v 0\nv 0\n", 2),
        ("v 0\nt 5\n", 2),
        ("v 0\nv 1\ne 0 2 1.0\n", 3),
        ("x 1\n", 1),
        ("v 0\nv 1\ne 0 1 abc\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_graph_text(text)
    assert exc.value.line_no == line
