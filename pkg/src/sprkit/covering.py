"""Coverage-timing checks over run traces.

For every vertex the trace tells us which terminal claimed it and in which
round.  Two timing events matter:

* late coverage: the vertex was still unclaimed after round
  floor(log_ratio(4 * D(v))), where D(v) is its distance to the nearest
  terminal.  Runs should avoid this with high probability, but the deadline
  is only meaningful for vertices whose D(v) is at least about half the
  graph's distance unit; below that the floor is negative and no round can
  satisfy it, so aggregate rates are also reported restricted to a caller-
  chosen distance floor.

* early coverage: some terminal t claimed v strictly before round
  floor(log_ratio(early_factor * d(v, t))).  This should essentially never
  happen.

A third per-run check: vertices claimed by the same terminal in the same
round should sit at comparable distances; the spread bound is
max d(t, v') <= (4 / early_factor) * min D(v) over the group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import DEADLINE_FACTOR, EARLY_FACTOR, RunTrace, SprParams
from .graph import DistanceMap, GraphError, WeightedGraph

SPREAD_FACTOR = DEADLINE_FACTOR / EARLY_FACTOR  # = 12 with the locked factors


@dataclass(frozen=True)
class CoverRecord:
    vertex: int
    terminal: int           # covering terminal vertex id
    round: int
    dist_to_terminal: float  # graph distance d(v, covering terminal)
    nearest_terminal: float  # D(v)
    deadline_round: int      # floor(log_ratio(4 * D(v)))
    early_round: int         # floor(log_ratio(early_factor * d(v, t)))
    covered_late: bool
    covered_early: bool


@dataclass(frozen=True)
class GroupSpread:
    terminal: int
    round: int
    max_dist: float
    min_nearest: float
    ok: bool


@dataclass(frozen=True)
class CoveringCheck:
    records: tuple[CoverRecord, ...]
    groups: tuple[GroupSpread, ...]

    @property
    def any_late(self) -> bool:
        return any(r.covered_late for r in self.records)

    @property
    def any_early(self) -> bool:
        return any(r.covered_early for r in self.records)

    def any_late_at_least(self, d_floor: float) -> bool:
        return any(r.covered_late for r in self.records if r.nearest_terminal >= d_floor)

    @property
    def spread_violations(self) -> tuple[GroupSpread, ...]:
        return tuple(g for g in self.groups if not g.ok)


def _floor_log_ratio(x: float, ratio: float) -> int:
    # x <= 0 cannot occur for positive distances; tiny x gives a very
    # negative deadline, which no round >= 0 can meet.
    return math.floor(math.log(x) / math.log(ratio))


def check_covering(
    trace: RunTrace,
    graph: WeightedGraph,
    params: SprParams,
    terminal_maps: tuple[DistanceMap, ...] | None = None,
) -> CoveringCheck:
    """Per-vertex coverage-timing records and same-step spread groups."""
    if trace.terminal_ids != graph.terminals:
        raise GraphError("trace terminals do not match graph terminals")
    if params.k != graph.k:
        raise GraphError("params terminal count does not match graph")
    if graph.k < 2:
        return CoveringCheck(records=(), groups=())
    unknown = {ev.vertex for ev in trace.cover_events} - graph.vertex_set
    if unknown:
        raise GraphError(
            f"trace covers vertices not in this graph (e.g. {sorted(unknown)[:3]}); "
            "was the run preprocessed with subdivision? check against the "
            "subdivided graph"
        )
    if terminal_maps is None:
        terminal_maps = graph.terminal_distance_maps
    term_index = {t: i for i, t in enumerate(graph.terminals)}
    nearest = graph.nearest_terminal_distance
    ratio = params.ratio
    ef = params.early_factor

    records = []
    groups: dict[tuple[int, int], list[CoverRecord]] = {}
    for ev in trace.cover_events:
        d_cover = terminal_maps[term_index[ev.terminal]].distance(ev.vertex)
        d_near = nearest[ev.vertex]
        deadline = _floor_log_ratio(DEADLINE_FACTOR * d_near, ratio)
        early = _floor_log_ratio(ef * d_cover, ratio)
        rec = CoverRecord(
            vertex=ev.vertex,
            terminal=ev.terminal,
            round=ev.round,
            dist_to_terminal=d_cover,
            nearest_terminal=d_near,
            deadline_round=deadline,
            early_round=early,
            covered_late=ev.round > deadline,
            covered_early=ev.round < early,
        )
        records.append(rec)
        groups.setdefault((ev.terminal, ev.round), []).append(rec)

    group_rows = []
    for (t, rnd), recs in sorted(groups.items()):
        max_dist = max(r.dist_to_terminal for r in recs)
        min_near = min(r.nearest_terminal for r in recs)
        group_rows.append(
            GroupSpread(
                terminal=t,
                round=rnd,
                max_dist=max_dist,
                min_nearest=min_near,
                ok=max_dist <= SPREAD_FACTOR * min_near * (1 + 1e-9),
            )
        )
    return CoveringCheck(records=tuple(records), groups=tuple(group_rows))


@dataclass(frozen=True)
class CoveringSummary:
    runs: int
    late_run_rate: float            # fraction of runs with any late coverage
    early_run_rate: float           # fraction of runs with any early coverage
    late_run_rate_restricted: float | None  # restricted to D(v) >= d_floor
    d_floor: float | None
    late_vertex_rate: float         # fraction of all vertex records late
    early_vertex_rate: float
    spread_violation_runs: int

    def to_json_dict(self) -> dict:
        return {
            "runs": self.runs,
            "late_run_rate": self.late_run_rate,
            "early_run_rate": self.early_run_rate,
            "late_run_rate_restricted": self.late_run_rate_restricted,
            "d_floor": self.d_floor,
            "late_vertex_rate": self.late_vertex_rate,
            "early_vertex_rate": self.early_vertex_rate,
            "spread_violation_runs": self.spread_violation_runs,
        }


def summarize_covering(
    checks: list[CoveringCheck], d_floor: float | None = None
) -> CoveringSummary:
    """Aggregate per-run checks into run-level and vertex-level rates."""
    runs = len(checks)
    if runs == 0:
        raise GraphError("no covering checks to summarize")
    late_runs = sum(1 for c in checks if c.any_late)
    early_runs = sum(1 for c in checks if c.any_early)
    total = sum(len(c.records) for c in checks)
    late_v = sum(sum(1 for r in c.records if r.covered_late) for c in checks)
    early_v = sum(sum(1 for r in c.records if r.covered_early) for c in checks)
    restricted = None
    if d_floor is not None:
        restricted = sum(1 for c in checks if c.any_late_at_least(d_floor)) / runs
    return CoveringSummary(
        runs=runs,
        late_run_rate=late_runs / runs,
        early_run_rate=early_runs / runs,
        late_run_rate_restricted=restricted,
        d_floor=d_floor,
        late_vertex_rate=late_v / total if total else 0.0,
        early_vertex_rate=early_v / total if total else 0.0,
        spread_violation_runs=sum(1 for c in checks if c.spread_violations),
    )
