import math

import pytest

from conftest import coarse_subdivided_random, random_connected_graph
from sprkit import RunTrace, SprParams, check_covering, run_spr, summarize_covering
from sprkit.covering import SPREAD_FACTOR
from sprkit.engine import CoverEvent
from sprkit.graph import WeightedGraph


def _unit_path(n_edges: int) -> WeightedGraph:
    edges = [(i, i + 1, 1.0) for i in range(n_edges)]
    return WeightedGraph.build(range(n_edges + 1), edges, [0, n_edges])


def _trace(graph: WeightedGraph, covers, rounds: int) -> RunTrace:
    return RunTrace(
        delta=0.05,
        seed=0,
        k=graph.k,
        terminal_ids=graph.terminals,
        radius_events=[],
        cover_events=[CoverEvent(*c) for c in covers],
        rounds=rounds,
    )


def test_terminal_only_graph_vacuously_clean():
    g = WeightedGraph.build([0, 1], [(0, 1, 1.0)], [0, 1])
    _, trace = run_spr(g, SprParams.for_graph(g, seed=1))
    check = check_covering(trace, g, SprParams.for_graph(g))
    assert check.records == ()
    assert not check.any_late and not check.any_early


def test_spread_factor_is_twelve():
    assert SPREAD_FACTOR == pytest.approx(12.0)


def test_hand_built_late_coverage_flagged():
    g = _unit_path(2)  # terminals 0 and 2, inner vertex 1 with D = 1
    p = SprParams.for_graph(g)
    deadline = math.floor(math.log(4.0) / math.log(p.ratio))  # 19 at k = 2
    on_time = _trace(g, [(1, 0, deadline, 1, 1.0)], deadline + 1)
    late = _trace(g, [(1, 0, deadline + 1, 1, 1.0)], deadline + 2)
    assert not check_covering(on_time, g, p).any_late
    check = check_covering(late, g, p)
    assert check.any_late
    assert check.records[0].deadline_round == deadline


def test_hand_built_early_coverage_flagged():
    g = _unit_path(10)
    p = SprParams.for_graph(g)
    # vertex 9 claimed by terminal 0 at distance 9; the earliest allowed
    # round is floor(log_ratio(9 / 3))
    threshold = math.floor(math.log(3.0) / math.log(p.ratio))
    early = _trace(g, [(9, 0, threshold - 1, 1, 9.0)], threshold)
    ok = _trace(g, [(9, 0, threshold, 1, 9.0)], threshold + 1)
    assert check_covering(early, g, p).any_early
    assert not check_covering(ok, g, p).any_early


def test_same_step_spread_violation():
    g = _unit_path(14)
    p = SprParams.for_graph(g)
    # vertices 1 and 13 claimed together by terminal 0: spread 13 > 12 * 1
    bad = _trace(g, [(1, 0, 5, 1, 1.0), (13, 0, 5, 1, 13.0)], 6)
    check = check_covering(bad, g, p)
    assert check.spread_violations
    grp = check.spread_violations[0]
    assert grp.max_dist == pytest.approx(13.0)
    assert grp.min_nearest == pytest.approx(1.0)
    # a group whose far vertex is still within twelve times the closest
    # member's terminal distance is fine
    good = _trace(g, [(1, 0, 5, 1, 1.0), (7, 0, 5, 1, 7.0)], 6)
    assert not check_covering(good, g, p).spread_violations


def test_real_runs_on_unit_scale_graphs_are_clean():
    g = random_connected_graph(40, 6, seed=41, extra_edges=20)
    checks = []
    for seed in range(30):
        p = SprParams.for_graph(g, seed=seed)
        _, trace = run_spr(g, p)
        checks.append(check_covering(trace, g, p))
    summary = summarize_covering(checks, d_floor=1.0)
    assert summary.early_run_rate == 0.0
    assert summary.late_run_rate_restricted == 0.0
    assert summary.spread_violation_runs == 0


def test_subdivided_graph_rates_split_by_distance_floor():
    # fine vertices near terminals cannot meet their (negative) deadlines,
    # so the raw rate saturates while the at-scale rate stays clean
    g, d_floor = coarse_subdivided_random(8, seed=2, n_base=20, threshold=0.25)
    checks = []
    for seed in range(10):
        p = SprParams.for_graph(g, seed=seed)
        _, trace = run_spr(g, p)
        checks.append(check_covering(trace, g, p))
    summary = summarize_covering(checks, d_floor=d_floor)
    assert summary.late_run_rate == 1.0
    assert summary.late_run_rate_restricted == 0.0
    assert summary.early_run_rate == 0.0


def test_record_fields_recomputable():
    g = _unit_path(4)
    p = SprParams.for_graph(g)
    _, trace = run_spr(g, p)
    check = check_covering(trace, g, p)
    for rec in check.records:
        assert rec.deadline_round == math.floor(
            math.log(4 * rec.nearest_terminal) / math.log(p.ratio)
        )
        assert rec.early_round == math.floor(
            math.log(rec.dist_to_terminal / 3) / math.log(p.ratio)
        )
        assert rec.covered_late == (rec.round > rec.deadline_round)
        assert rec.covered_early == (rec.round < rec.early_round)


def test_mismatched_trace_rejected():
    g = _unit_path(3)
    other = _unit_path(4)
    _, trace = run_spr(g, SprParams.for_graph(g, seed=0))
    with pytest.raises(Exception):
        check_covering(trace, other, SprParams.for_graph(other))
