"""Interval partitions of terminal paths and the detour charging ledger.

For a terminal pair (t, t') we fix the canonical shortest path and cut its
interior into consecutive intervals.  Each interval Q starts at an anchor
vertex u and extends by the fewest vertices needed for its external length
(distance between the vertices just outside Q) to reach
(interval_factor * delta / ln k) * D(u); minimality keeps the internal
length (distance between Q's own endpoints) at or below the same bound.

Replaying a run trace against the path yields the charging ledger.  A step
that claims at least one still-active path vertex deactivates the whole
index span between the lowest and highest claimed active vertices (a
detour), charges the interval holding the active vertex that was cheapest
for the growing cluster to reach, and erases any older detour strictly
inside the new span together with its charge.  Slices are maximal runs of
active vertices inside one interval; a step that fails to wipe out its
trigger slice is labeled a failure.  The final cost is
f = sum over intervals of (surviving charges) * (external length).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from heapq import heappop, heappush

from .engine import RunTrace, SprParams
from .graph import DistanceMap, GraphError, WeightedGraph

COST_BOUND_FACTOR = 43.0  # exceedance threshold for the final cost, in units of d(t, t')


class InteriorTerminalError(GraphError):
    """The canonical path passes through another terminal.

    Such pairs are handled by chaining the terminal-free subpairs along the
    path (triangle inequality), not by analyzing the pair directly.
    """

    def __init__(self, pair: tuple[int, int], terminal: int):
        super().__init__(
            f"path {pair[0]} -> {pair[1]} passes through terminal {terminal}; "
            "analyze consecutive terminal-free pairs instead"
        )
        self.pair = pair
        self.terminal = terminal


class LedgerError(GraphError):
    """Trace inconsistent with the graph or path state during replay."""


@dataclass(frozen=True)
class Interval:
    start: int        # path index of the first vertex (anchor)
    end: int          # path index of the last vertex, inclusive
    anchor: int       # = start, the vertex whose distance sets the bound
    length_in: float  # distance between the interval's own endpoints
    length_out: float  # distance between the vertices just outside it
    bound: float      # (interval_factor * delta / ln k) * D(anchor)


@dataclass(frozen=True, eq=False)
class IntervalPartition:
    pair: tuple[int, int]            # terminal vertex ids (t, t')
    path: tuple[int, ...]            # full canonical path, t .. t'
    positions: tuple[float, ...]     # cumulative distance along the path
    intervals: tuple[Interval, ...]

    @property
    def phi(self) -> int:
        return len(self.intervals)

    @property
    def total_length(self) -> float:
        """d(t, t'): the full path length."""
        return self.positions[-1]

    @property
    def interior_size(self) -> int:
        return len(self.path) - 2

    @cached_property
    def interval_of_index(self) -> dict[int, int]:
        out = {}
        for qi, q in enumerate(self.intervals):
            for idx in range(q.start, q.end + 1):
                out[idx] = qi
        return out

    @cached_property
    def max_length_in(self) -> float:
        return max((q.length_in for q in self.intervals), default=0.0)

    def sum_length_out(self) -> float:
        return sum(q.length_out for q in self.intervals)


def build_interval_partition(
    graph: WeightedGraph,
    t: int,
    t_prime: int,
    params: SprParams,
    dist_map: DistanceMap | None = None,
) -> IntervalPartition:
    """Greedy left-to-right sweep of the canonical path interior.

    After covering the prefix up to v_{h-1}, the next interval anchors at
    v_h and takes the minimal s >= 0 with external length of
    {v_h .. v_{h+s}} at least bound(v_h).  Both defining inequalities
    (internal <= bound <= external) hold for every emitted interval.
    """
    if t == t_prime:
        raise GraphError("pair must be two distinct terminals")
    for v in (t, t_prime):
        if v not in graph.terminals:
            raise GraphError(f"vertex {v} is not a terminal")
    if params.k != graph.k or graph.k < 2:
        raise GraphError("params must match a graph with at least two terminals")
    if dist_map is None:
        dist_map = graph.terminal_distance_maps[graph.terminal_index(t) - 1]
    path = dist_map.path_to(t_prime)
    terminal_set = set(graph.terminals)
    for v in path[1:-1]:
        if v in terminal_set:
            raise InteriorTerminalError((t, t_prime), v)

    positions = [0.0]
    for v in path[1:]:
        positions.append(dist_map.distance(v))
    nearest = graph.nearest_terminal_distance
    coef = params.interval_factor * params.delta / math.log(graph.k)

    intervals: list[Interval] = []
    last = len(path) - 1  # index of t'
    h = 1
    while h <= last - 1:
        bound = coef * nearest[path[h]]
        s = 0
        # minimal s with positions[h+s+1] - positions[h-1] >= bound; the
        # full remainder always qualifies because it reaches past t'.
        while h + s <= last - 1 and positions[h + s + 1] - positions[h - 1] < bound:
            s += 1
        if h + s > last - 1:
            s = last - 1 - h
        end = h + s
        intervals.append(
            Interval(
                start=h,
                end=end,
                anchor=h,
                length_in=positions[end] - positions[h],
                length_out=positions[end + 1] - positions[h - 1],
                bound=bound,
            )
        )
        h = end + 1
    return IntervalPartition(
        pair=(t, t_prime),
        path=tuple(path),
        positions=tuple(positions),
        intervals=tuple(intervals),
    )


@dataclass
class Detour:
    ident: int
    a: int                 # lowest path index deactivated by the step
    b: int                 # highest path index deactivated by the step
    round: int
    step: int
    terminal: int
    trigger_vertex: int    # path index of the cheapest-to-reach active vertex
    trigger_interval: int
    erased: bool = False


@dataclass(frozen=True)
class ChargeStep:
    detour_id: int
    round: int
    step: int
    terminal: int
    a: int
    b: int
    trigger_vertex: int      # path index
    trigger_interval: int
    q_step: float            # the step's sampled increment
    q_trigger: float         # minimal increment that reaches the trigger vertex
    q_slice: float           # minimal increment that deactivates the whole trigger slice
    dist_trigger_terminal: float  # graph distance d(trigger vertex, stepping terminal)
    qualifies: bool          # round >= log_ratio(early_factor * that distance)
    success: bool            # q_step >= q_slice
    erased_ids: tuple[int, ...]
    slices_after: tuple[tuple[int, int], ...]  # (interval, live slice count) for touched intervals


@dataclass
class DetourLedger:
    partition: IntervalPartition
    steps: list[ChargeStep]
    detours: list[Detour]
    final_charges: list[int]       # surviving detour count per interval
    cost: float                    # sum of charges weighted by external lengths

    @property
    def surviving(self) -> list[Detour]:
        return [d for d in self.detours if not d.erased]

    def tiles_interior(self) -> bool:
        """Surviving detours must cover the interior consecutively, no overlap."""
        spans = sorted((d.a, d.b) for d in self.surviving)
        expect = 1
        for a, b in spans:
            if a != expect or b < a:
                return False
            expect = b + 1
        return expect == len(self.partition.path) - 1


def _bounded_region_search(
    adj, owner: dict[int, int], cluster: int, source: int, stop_set: set[int], extra: float
) -> tuple[dict[int, float], float | None]:
    """Distances from source through unclaimed-or-own vertices.

    Settles until the first vertex of ``stop_set`` is reached, then keeps
    going for ``extra`` distance beyond it so all comparably close targets
    are settled too.  Returns (distances, distance of first stop vertex).
    """
    dist: dict[int, float] = {}
    best = {source: 0.0}
    heap: list[tuple[float, int]] = [(0.0, source)]
    first_stop: float | None = None
    while heap:
        d, v = heappop(heap)
        if v in dist or d != best.get(v):
            continue
        if first_stop is not None and d > first_stop + extra:
            break
        dist[v] = d
        if first_stop is None and v in stop_set:
            first_stop = d
        for nbr, w in adj[v]:
            if nbr in dist:
                continue
            ow = owner.get(nbr)
            if ow is not None and ow != cluster:
                continue
            nd = d + w
            if nd < best.get(nbr, math.inf):
                best[nbr] = nd
                heappush(heap, (nd, nbr))
    return dist, first_stop


def reconstruct_ledger(
    trace: RunTrace,
    graph: WeightedGraph,
    partition: IntervalPartition,
    params: SprParams,
    terminal_maps: tuple[DistanceMap, ...] | None = None,
) -> DetourLedger:
    """Replay the trace in order and rebuild the full charging ledger.

    The minimal increments q_v are recomputed at replay time from the
    recorded pre-step state: q_v is the current region distance from the
    stepping terminal to v minus the cluster's pre-step radius.  Ties for
    the trigger vertex break toward the lowest path index.
    """
    if trace.terminal_ids != graph.terminals:
        raise LedgerError("trace terminals do not match graph terminals")
    unknown = {ev.vertex for ev in trace.cover_events} - graph.vertex_set
    if unknown:
        raise LedgerError(
            f"trace covers vertices not in this graph (e.g. {sorted(unknown)[:3]}); "
            "was the run preprocessed with subdivision? analyze against the "
            "subdivided graph"
        )
    if terminal_maps is None:
        terminal_maps = graph.terminal_distance_maps
    term_index = {t: i for i, t in enumerate(graph.terminals)}
    adj = graph.adjacency

    path = partition.path
    interior = set(path[1:-1])
    path_index = {v: i for i, v in enumerate(path)}
    last = len(path) - 1
    active = [False] + [True] * (last - 1) + [False]  # indexed like path
    interval_of = partition.interval_of_index
    n_intervals = partition.phi

    owner: dict[int, int] = {t: j for j, t in enumerate(graph.terminals, start=1)}
    radii = {j: 0.0 for j in range(1, trace.k + 1)}
    charges = [0] * n_intervals
    slices = [1 if q.end >= q.start else 0 for q in partition.intervals]
    live: list[Detour] = []
    detours: list[Detour] = []
    steps: list[ChargeStep] = []
    cover_by_step = trace.events_by_step()
    ratio = params.ratio
    extra = partition.max_length_in * (1 + 1e-9) + 1e-15

    def slice_count(qi: int) -> int:
        q = partition.intervals[qi]
        count = 0
        running = False
        for idx in range(q.start, q.end + 1):
            if active[idx] and not running:
                count += 1
                running = True
            elif not active[idx]:
                running = False
        return count

    seen_cover: set[int] = set()
    active_count = last - 1
    live_span_total = 0
    for rev in trace.radius_events:
        j = rev.step
        pre_radius = radii[j]
        radii[j] += rev.q
        events = cover_by_step.get((rev.round, rev.step), [])
        for ev in events:
            if ev.vertex in seen_cover:
                raise LedgerError(f"vertex {ev.vertex} covered twice in trace")
            seen_cover.add(ev.vertex)
        newly_active = [
            path_index[ev.vertex]
            for ev in events
            if ev.vertex in interior and active[path_index[ev.vertex]]
        ]
        if not newly_active:
            for ev in events:
                owner[ev.vertex] = j
            continue

        # charging step: find the trigger vertex from the pre-step state
        t_j = graph.terminals[j - 1]
        active_vertices = {path[i] for i in range(1, last) if active[i]}
        dist, first = _bounded_region_search(adj, owner, j, t_j, active_vertices, extra)
        if first is None:
            raise LedgerError(
                f"step ({rev.round},{j}) covers active path vertices but none "
                "is reachable in the replayed pre-step state"
            )
        candidates = [
            i for i in range(1, last)
            if active[i] and path[i] in dist and dist[path[i]] == first
        ]
        trigger_idx = min(candidates)
        q_trigger = first - pre_radius
        if q_trigger < -1e-9:
            raise LedgerError("trigger vertex was already inside the pre-step radius")
        qi = interval_of[trigger_idx]

        # trigger slice: maximal active run inside the trigger interval
        q_int = partition.intervals[qi]
        s_lo = trigger_idx
        while s_lo - 1 >= q_int.start and active[s_lo - 1]:
            s_lo -= 1
        s_hi = trigger_idx
        while s_hi + 1 <= q_int.end and active[s_hi + 1]:
            s_hi += 1
        # deactivating the whole slice needs one claimed active vertex at or
        # left of its left end and one at or right of its right end
        left_candidates = [
            dist[path[i]] for i in range(1, s_lo + 1) if active[i] and path[i] in dist
        ]
        right_candidates = [
            dist[path[i]] for i in range(s_hi, last) if active[i] and path[i] in dist
        ]
        if not left_candidates or not right_candidates:
            q_slice = math.inf
        else:
            q_slice = max(min(left_candidates), min(right_candidates)) - pre_radius

        a = min(newly_active)
        b = max(newly_active)
        if not (a <= trigger_idx <= b):
            raise LedgerError("trigger vertex not inside the step's detour span")

        pre_slices = list(slices)
        erased_ids = []
        for d in live:
            if a < d.a and d.b < b:
                d.erased = True
                charges[d.trigger_interval] -= 1
                live_span_total -= d.b - d.a + 1
                erased_ids.append(d.ident)
        live = [d for d in live if not d.erased]
        for idx in range(a, b + 1):
            if active[idx]:
                active_count -= 1
            active[idx] = False
        det = Detour(
            ident=len(detours), a=a, b=b, round=rev.round, step=j, terminal=t_j,
            trigger_vertex=trigger_idx, trigger_interval=qi,
        )
        detours.append(det)
        live.append(det)
        charges[qi] += 1
        live_span_total += b - a + 1
        # active vertices are always the interior minus the live detours
        if active_count + live_span_total != last - 1:
            raise LedgerError(
                f"live detours and active vertices fell out of step at "
                f"({rev.round},{j})"
            )

        # slice bookkeeping: only intervals touched by the span can change,
        # none but the trigger interval may gain a slice, and a success
        # strictly shrinks the trigger interval's count
        lo_int = interval_of[a]
        hi_int = interval_of[b]
        touched = []
        for qidx in range(lo_int, hi_int + 1):
            slices[qidx] = slice_count(qidx)
            touched.append((qidx, slices[qidx]))
            if qidx != qi and slices[qidx] > pre_slices[qidx]:
                raise LedgerError(
                    f"interval {qidx} gained a slice at step ({rev.round},{j})"
                )
        if slices[qi] > pre_slices[qi] + 1:
            raise LedgerError(
                f"trigger interval {qi} gained more than one slice at "
                f"step ({rev.round},{j})"
            )
        q_step = rev.q
        success = q_step >= q_slice
        if success and not slices[qi] < pre_slices[qi]:
            raise LedgerError(
                f"successful step ({rev.round},{j}) did not shrink the trigger "
                "interval's slice count"
            )

        d_trig = terminal_maps[term_index[t_j]].distance(path[trigger_idx])
        qualifies = rev.round >= math.log(params.early_factor * d_trig) / math.log(ratio)
        steps.append(
            ChargeStep(
                detour_id=det.ident, round=rev.round, step=j, terminal=t_j,
                a=a, b=b, trigger_vertex=trigger_idx, trigger_interval=qi,
                q_step=q_step, q_trigger=q_trigger, q_slice=q_slice,
                dist_trigger_terminal=d_trig, qualifies=qualifies,
                success=success, erased_ids=tuple(erased_ids),
                slices_after=tuple(touched),
            )
        )
        for ev in events:
            owner[ev.vertex] = j

    missing = {v for v in graph.vertices if v not in owner and v not in term_index}
    if missing:
        raise LedgerError(f"trace is incomplete; vertices never covered: {sorted(missing)[:5]}")

    cost = sum(
        c * q.length_out for c, q in zip(charges, partition.intervals)
    )
    return DetourLedger(
        partition=partition,
        steps=steps,
        detours=detours,
        final_charges=charges,
        cost=cost,
    )


@dataclass(frozen=True)
class FailureRateResult:
    qualifying_steps: int
    failures: int
    fraction: float | None
    ci95: tuple[float, float] | None

    def to_json_dict(self) -> dict:
        return {
            "qualifying_steps": self.qualifying_steps,
            "failures": self.failures,
            "fraction": self.fraction,
            "ci95": list(self.ci95) if self.ci95 else None,
        }


def failure_rate(ledgers: list[DetourLedger]) -> FailureRateResult:
    """Pooled failure fraction over qualifying charging steps, with a 95% CI.

    Steps qualify when their round is at least log_ratio(early_factor *
    d(trigger, terminal)).  Zero qualifying steps is reported, not an error.
    """
    qualifying = [s for led in ledgers for s in led.steps if s.qualifies]
    n = len(qualifying)
    if n == 0:
        return FailureRateResult(0, 0, None, None)
    failures = sum(1 for s in qualifying if not s.success)
    p = failures / n
    half = 1.96 * math.sqrt(max(p * (1 - p), 1e-12) / n)
    return FailureRateResult(n, failures, p, (max(0.0, p - half), min(1.0, p + half)))


@dataclass(frozen=True)
class CostBoundResult:
    runs: int
    exceedances: int
    rate: float
    ci95: tuple[float, float]
    pair_distance: float
    sum_external: float
    structural_ok: bool  # pair distance <= sum of external lengths <= twice that

    def to_json_dict(self) -> dict:
        return {
            "runs": self.runs,
            "exceedances": self.exceedances,
            "rate": self.rate,
            "ci95": list(self.ci95),
            "pair_distance": self.pair_distance,
            "sum_external": self.sum_external,
            "structural_ok": self.structural_ok,
        }


def cost_bound_check(
    ledgers: list[DetourLedger], factor: float = COST_BOUND_FACTOR
) -> CostBoundResult:
    """Rate of final cost >= factor * d(t, t') across runs of one pair.

    Also checks the structural identity that the external lengths of the
    intervals cover every path edge at least once and at most twice.
    """
    if not ledgers:
        raise GraphError("no ledgers given")
    part = ledgers[0].partition
    for led in ledgers:
        other = led.partition
        if (
            other.pair != part.pair
            or other.path != part.path
            or other.positions != part.positions
        ):
            raise GraphError("ledgers mix different terminal pairs or graphs")
    delta = part.total_length
    exceed = sum(1 for led in ledgers if led.cost >= factor * delta)
    n = len(ledgers)
    rate = exceed / n
    half = 1.96 * math.sqrt(max(rate * (1 - rate), 1e-12) / n)
    sum_out = part.sum_length_out()
    if part.interior_size == 0:
        # adjacent terminals: no intervals exist and the identity is vacuous
        structural_ok = True
    else:
        structural_ok = delta * (1 - 1e-9) <= sum_out <= 2 * delta * (1 + 1e-9)
    return CostBoundResult(
        runs=n,
        exceedances=exceed,
        rate=rate,
        ci95=(max(0.0, rate - half), min(1.0, rate + half)),
        pair_distance=delta,
        sum_external=sum_out,
        structural_ok=structural_ok,
    )
