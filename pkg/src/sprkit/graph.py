"""Weighted undirected graphs with a distinguished terminal set.

The graph is immutable after construction.  All operations here are pure
functions; results depend only on their inputs, so graphs and distance maps
can be shared freely across threads.

Vertex ids are nonnegative integers.  Loaders and generators hand out dense
ids 0..n-1; operations such as ``induced_subgraph`` keep the original ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from heapq import heappop, heappush


class GraphError(ValueError):
    """Invalid graph structure or argument."""


class ParseError(GraphError):
    """Malformed graph text; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph with positive edge weights and ordered terminals.

    ``edges`` are canonical: ``u < v``, sorted, at most one per pair, no
    self-loops, every weight positive and finite.  ``terminals`` is an
    ordered list; terminal j (1-based) is ``terminals[j-1]``.
    """

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]
    terminals: tuple[int, ...]
    labels: dict[int, str] = field(default_factory=dict)

    @staticmethod
    def build(
        vertices,
        edges,
        terminals,
        labels: dict[int, str] | None = None,
    ) -> "WeightedGraph":
        vset = set()
        for v in vertices:
            v = int(v)
            if v < 0:
                raise GraphError(f"negative vertex id {v}")
            if v in vset:
                raise GraphError(f"duplicate vertex id {v}")
            vset.add(v)
        canon = []
        seen_pairs = set()
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if u not in vset or v not in vset:
                raise GraphError(f"edge ({u},{v}) references unknown vertex")
            if not (math.isfinite(w) and w > 0.0):
                raise GraphError(f"edge ({u},{v}) has non-positive weight {w}")
            if u > v:
                u, v = v, u
            if (u, v) in seen_pairs:
                raise GraphError(f"duplicate edge ({u},{v})")
            seen_pairs.add((u, v))
            canon.append((u, v, w))
        canon.sort()
        terms = tuple(int(t) for t in terminals)
        if len(terms) < 1:
            raise GraphError("at least one terminal required")
        if len(set(terms)) != len(terms):
            raise GraphError("terminals must be distinct")
        for t in terms:
            if t not in vset:
                raise GraphError(f"terminal {t} is not a vertex")
        return WeightedGraph(
            vertices=tuple(sorted(vset)),
            edges=tuple(canon),
            terminals=terms,
            labels=dict(labels) if labels else {},
        )

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def k(self) -> int:
        return len(self.terminals)

    @cached_property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @cached_property
    def adjacency(self) -> dict[int, tuple[tuple[int, float], ...]]:
        adj: dict[int, list[tuple[int, float]]] = {v: [] for v in self.vertices}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return {v: tuple(sorted(nbrs)) for v, nbrs in adj.items()}

    @cached_property
    def terminal_distance_maps(self) -> tuple["DistanceMap", ...]:
        """One shortest-path map per terminal, in terminal order."""
        return tuple(shortest_paths(self, t) for t in self.terminals)

    @cached_property
    def nearest_terminal_distance(self) -> dict[int, float]:
        """Distance from every vertex to its closest terminal (multi-source)."""
        dist: dict[int, float] = {}
        heap: list[tuple[float, int]] = [(0.0, t) for t in sorted(self.terminals)]
        adj = self.adjacency
        while heap:
            d, v = heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            for nbr, w in adj[v]:
                if nbr not in dist:
                    heappush(heap, (d + w, nbr))
        return dist

    def terminal_index(self, t: int) -> int:
        """1-based index of terminal vertex ``t``."""
        try:
            return self.terminals.index(t) + 1
        except ValueError:
            raise GraphError(f"vertex {t} is not a terminal") from None

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for nbr, _ in adj[v]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == self.n


@dataclass(frozen=True)
class DistanceMap:
    """Single-source shortest distances plus one canonical path per target.

    Unreachable vertices are simply absent from ``dist``; there is no
    infinity sentinel.  Canonical paths break ties toward the predecessor
    with the lowest vertex id, so equal inputs give identical paths.
    """

    source: int
    dist: dict[int, float]
    pred: dict[int, int]

    def reachable(self, v: int) -> bool:
        return v in self.dist

    def distance(self, v: int) -> float:
        if v not in self.dist:
            raise GraphError(f"vertex {v} is not reachable from {self.source}")
        return self.dist[v]

    def path_to(self, v: int) -> list[int]:
        """Canonical shortest path from the source to ``v`` (inclusive)."""
        if v not in self.dist:
            raise GraphError(f"vertex {v} is not reachable from {self.source}")
        path = [v]
        while path[-1] != self.source:
            path.append(self.pred[path[-1]])
        path.reverse()
        return path


def shortest_paths(graph: WeightedGraph, source: int) -> DistanceMap:
    """Exact Dijkstra distances from ``source`` with canonical predecessors."""
    if source not in graph.vertex_set:
        raise GraphError(f"unknown source vertex {source}")
    dist: dict[int, float] = {}
    pred: dict[int, int] = {}
    best: dict[int, float] = {source: 0.0}
    heap: list[tuple[float, int]] = [(0.0, source)]
    adj = graph.adjacency
    while heap:
        d, v = heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for nbr, w in adj[v]:
            if nbr in dist:
                continue
            nd = d + w
            old = best.get(nbr)
            if old is None or nd < old:
                best[nbr] = nd
                pred[nbr] = v
                heappush(heap, (nd, nbr))
            elif nd == old and v < pred[nbr]:
                # equal-length alternative through a lower-id predecessor
                pred[nbr] = v
    return DistanceMap(source=source, dist=dist, pred=pred)


def ball(graph: WeightedGraph, center: int, radius: float) -> set[int]:
    """Vertices within graph distance ``radius`` of ``center``, boundary inclusive."""
    if center not in graph.vertex_set:
        raise GraphError(f"unknown center vertex {center}")
    if radius < 0:
        raise GraphError(f"negative radius {radius}")
    out: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, center)]
    best: dict[int, float] = {center: 0.0}
    adj = graph.adjacency
    while heap:
        d, v = heappop(heap)
        if v in out:
            continue
        if d > radius:
            break
        out.add(v)
        for nbr, w in adj[v]:
            if nbr in out:
                continue
            nd = d + w
            if nd <= radius and nd < best.get(nbr, math.inf):
                best[nbr] = nd
                heappush(heap, (nd, nbr))
    return out


def induced_subgraph(graph: WeightedGraph, keep) -> WeightedGraph:
    """Subgraph on ``keep``: all edges with both endpoints kept, terminals restricted."""
    keep_set = set(int(v) for v in keep)
    unknown = keep_set - graph.vertex_set
    if unknown:
        raise GraphError(f"keep set contains unknown vertices {sorted(unknown)}")
    edges = [(u, v, w) for u, v, w in graph.edges if u in keep_set and v in keep_set]
    terms = [t for t in graph.terminals if t in keep_set]
    if not terms:
        raise GraphError("induced subgraph keeps no terminal")
    labels = {v: s for v, s in graph.labels.items() if v in keep_set}
    return WeightedGraph.build(sorted(keep_set), edges, terms, labels)


@dataclass(frozen=True)
class SubdivideResult:
    graph: WeightedGraph
    host_edge: dict[int, tuple[int, int]]  # new vertex -> original (u, v)


def subdivide_edges(graph: WeightedGraph, threshold: float) -> SubdivideResult:
    """Split every edge heavier than ``threshold`` into equal segments.

    An edge of weight w > threshold becomes a path of ceil(w / threshold)
    segments of weight w / ceil(w / threshold) each, through fresh
    non-terminal vertices of degree two.  Distances between original
    vertices are preserved (the split is an exact partition of the weight,
    up to float rounding).  Fresh ids are handed out from max(id)+1 in
    canonical edge order, so the result is deterministic.
    """
    if not (threshold > 0 and math.isfinite(threshold)):
        raise GraphError(f"threshold must be positive and finite, got {threshold}")
    next_id = max(graph.vertices) + 1 if graph.vertices else 0
    vertices = list(graph.vertices)
    new_edges: list[tuple[int, int, float]] = []
    host: dict[int, tuple[int, int]] = {}
    for u, v, w in graph.edges:
        if w <= threshold:
            new_edges.append((u, v, w))
            continue
        segments = math.ceil(w / threshold)
        seg_w = w / segments
        prev = u
        for _ in range(segments - 1):
            fresh = next_id
            next_id += 1
            vertices.append(fresh)
            host[fresh] = (u, v)
            new_edges.append((prev, fresh, seg_w))
            prev = fresh
        new_edges.append((prev, v, seg_w))
    g = WeightedGraph.build(vertices, new_edges, graph.terminals, graph.labels)
    return SubdivideResult(graph=g, host_edge=host)


# ---------------------------------------------------------------------------
# Text format: '#' comments, 'v <id> [label]', 't <id>', 'e <u> <v> <weight>'.
# ---------------------------------------------------------------------------

def parse_graph_text(text: str) -> WeightedGraph:
    vertices: list[int] = []
    vset: set[int] = set()
    terminals: list[int] = []
    edges: list[tuple[int, int, float]] = []
    labels: dict[int, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "v":
                if len(parts) not in (2, 3):
                    raise ValueError("expected 'v <id> [label]'")
                vid = int(parts[1])
                if vid in vset:
                    raise ValueError(f"duplicate vertex {vid}")
                vset.add(vid)
                vertices.append(vid)
                if len(parts) == 3:
                    labels[vid] = parts[2]
            elif tag == "t":
                if len(parts) != 2:
                    raise ValueError("expected 't <id>'")
                tid = int(parts[1])
                if tid not in vset:
                    raise ValueError(f"terminal {tid} not declared as vertex")
                if tid in terminals:
                    raise ValueError(f"duplicate terminal {tid}")
                terminals.append(tid)
            elif tag == "e":
                if len(parts) != 4:
                    raise ValueError("expected 'e <u> <v> <weight>'")
                u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
                if u not in vset or v not in vset:
                    raise ValueError(f"edge ({u},{v}) references undeclared vertex")
                edges.append((u, v, w))
            else:
                raise ValueError(f"unknown record type {tag!r}")
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
    try:
        return WeightedGraph.build(vertices, edges, terminals, labels)
    except GraphError as exc:
        raise ParseError(0, str(exc)) from None


def format_graph_text(graph: WeightedGraph) -> str:
    lines = []
    for v in graph.vertices:
        if v in graph.labels:
            lines.append(f"v {v} {graph.labels[v]}")
        else:
            lines.append(f"v {v}")
    for t in graph.terminals:
        lines.append(f"t {t}")
    for u, v, w in graph.edges:
        lines.append(f"e {u} {v} {w!r}")
    return "\n".join(lines) + "\n"
