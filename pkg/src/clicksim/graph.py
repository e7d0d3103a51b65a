"""Event transition graphs.

Transition counts come straight from sessions: every session contributes
a start-sentinel edge into its first event, one edge per consecutive
pair, and an edge from its last event into the end sentinel. Counts are
turned into probabilities with additive (Laplace) smoothing,

    p(i -> j) = (c_ij + alpha) / (c_i + alpha * k_i)

where k_i is the size of the smoothing support for source i: the set of
observed successors (default) or, with ``smoothing_support="all"``,
every node that may legally be a destination. Rows always sum to 1.

Graphs are immutable; :func:`insert_event` returns a rescaled copy with
a hypothetical new node spliced in. The on-disk JSON format is
documented in docs/graph-format.md.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DuplicateNode, InvalidWeight, SentinelViolation, UnobservedEdge
from .events import (
    SESSION_END,
    SESSION_START,
    EventDescriptor,
    EventNode,
    SegmentKey,
    SessionRecord,
)

__all__ = [
    "Edge",
    "TransitionCounts",
    "EventTransitionGraph",
    "count_transitions",
    "smoothed_probability",
    "build_graph",
    "insert_event",
]

GRAPH_FORMAT = "clicksim-graph"
GRAPH_VERSION = 1
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Edge:
    dst: str
    probability: float
    count: int


@dataclass
class TransitionCounts:
    """Raw transition tallies plus the node registry they refer to."""

    nodes: dict[str, EventNode] = field(default_factory=dict)
    counts: dict[str, Counter] = field(default_factory=dict)

    def add(self, src: EventNode, dst: EventNode, n: int = 1) -> None:
        self.nodes.setdefault(src.id, src)
        self.nodes.setdefault(dst.id, dst)
        self.counts.setdefault(src.id, Counter())[dst.id] += n

    def count(self, src_id: str, dst_id: str) -> int:
        return self.counts.get(src_id, Counter()).get(dst_id, 0)

    def total(self, src_id: str) -> int:
        """c_i: total outgoing transitions observed from src."""
        return sum(self.counts.get(src_id, Counter()).values())

    def successor_count(self, src_id: str) -> int:
        """k_i: number of distinct observed successors of src."""
        return sum(1 for c in self.counts.get(src_id, Counter()).values() if c > 0)


def count_transitions(
    sessions: Sequence[SessionRecord], id_fields: Iterable[str] | None = None
) -> TransitionCounts:
    """Tally sentinel-bounded transitions over all sessions."""
    if not sessions:
        raise ValueError("no sessions to count")
    id_fields = tuple(id_fields) if id_fields is not None else None
    tc = TransitionCounts()
    node_cache: dict[EventDescriptor, EventNode] = {}

    def node_of(descriptor: EventDescriptor) -> EventNode:
        node = node_cache.get(descriptor)
        if node is None:
            node = EventNode.from_descriptor(descriptor, id_fields)
            node_cache[descriptor] = node
        return node

    for session in sessions:
        path = [SESSION_START] + [node_of(d) for _, d in session.events] + [SESSION_END]
        for a, b in zip(path, path[1:]):
            tc.add(a, b)
    return tc


def _support_size(tc: TransitionCounts, src_id: str, smoothing_support: str) -> int:
    if smoothing_support == "observed":
        return tc.successor_count(src_id)
    if smoothing_support == "all":
        # every node except the start sentinel is a legal destination
        return len(tc.nodes) - 1
    raise ValueError(f"unknown smoothing_support {smoothing_support!r}")


def smoothed_probability(
    tc: TransitionCounts,
    src_id: str,
    dst_id: str,
    alpha: float,
    smoothing_support: str = "observed",
) -> float:
    """(c_ij + alpha) / (c_i + alpha * k_i) for an observed transition.

    With alpha=0 this degenerates to the maximum-likelihood estimate.
    Raises :class:`UnobservedEdge` when c_ij = 0 and support is
    "observed"; under "all" support any legal pair has a probability.
    """
    c_ij = tc.count(src_id, dst_id)
    if c_ij == 0 and smoothing_support == "observed":
        raise UnobservedEdge(f"{src_id} -> {dst_id} never observed")
    k = _support_size(tc, src_id, smoothing_support)
    return (c_ij + alpha) / (tc.total(src_id) + alpha * k)


@dataclass(frozen=True)
class EventTransitionGraph:
    """Weighted digraph over event nodes, including both sentinels.

    ``out_edges[src]`` is sorted by destination id; that fixed order is
    what the simulator's inverse-CDF sampling indexes into.
    """

    nodes: Mapping[str, EventNode]
    out_edges: Mapping[str, tuple[Edge, ...]]
    alpha: float
    smoothing_support: str = "observed"
    segment: SegmentKey = field(default_factory=SegmentKey)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if SESSION_START.id not in self.nodes or SESSION_END.id not in self.nodes:
            raise ValueError("graph must contain both sentinel nodes")
        if self.out_edges.get(SESSION_END.id):
            raise SentinelViolation("end sentinel must not have out-edges")
        for src, edges in self.out_edges.items():
            if not edges:
                continue
            dsts = [e.dst for e in edges]
            if dsts != sorted(dsts) or len(set(dsts)) != len(dsts):
                raise ValueError(f"edges of {src} not sorted/unique by destination")
            if any(e.dst == SESSION_START.id for e in edges):
                raise SentinelViolation("start sentinel must not have in-edges")
            if any(not (0.0 < e.probability <= 1.0) for e in edges):
                raise ValueError(f"probability outside (0,1] on edges of {src}")
            total = sum(e.probability for e in edges)
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"out-probabilities of {src} sum to {total!r}")
        for nid in self.nodes:
            if nid != SESSION_END.id and not self.out_edges.get(nid):
                raise ValueError(f"non-end node {nid} has no out-edges")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.out_edges.values())

    def edges_from(self, src_id: str) -> tuple[Edge, ...]:
        return self.out_edges.get(src_id, ())

    def probability(self, src_id: str, dst_id: str) -> float:
        for e in self.edges_from(src_id):
            if e.dst == dst_id:
                return e.probability
        return 0.0

    def count(self, src_id: str, dst_id: str) -> int:
        for e in self.edges_from(src_id):
            if e.dst == dst_id:
                return e.count
        return 0

    def observed(self, src_id: str, dst_id: str) -> bool:
        return self.count(src_id, dst_id) > 0

    def valid_sources(self) -> list[str]:
        """All node ids that may start a transition (everything but the end sentinel)."""
        return sorted(nid for nid in self.nodes if nid != SESSION_END.id)

    def valid_destinations(self) -> list[str]:
        """All node ids a transition may land on (everything but the start sentinel)."""
        return sorted(nid for nid in self.nodes if nid != SESSION_START.id)

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        nodes = [
            {
                "id": n.id,
                "text": n.canonical_text,
                "sentinel": n.is_sentinel,
                "descriptor": None if n.is_sentinel else dict(n.descriptor),
            }
            for n in sorted(self.nodes.values(), key=lambda n: n.id)
        ]
        edges = [
            {"src": src, "dst": e.dst, "p": e.probability, "count": e.count}
            for src in sorted(self.out_edges)
            for e in self.out_edges[src]
        ]
        return {
            "format": GRAPH_FORMAT,
            "version": GRAPH_VERSION,
            "alpha": self.alpha,
            "smoothing_support": self.smoothing_support,
            "segment": dict(self.segment),
            "nodes": nodes,
            "edges": edges,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "EventTransitionGraph":
        if doc.get("format") != GRAPH_FORMAT or doc.get("version") != GRAPH_VERSION:
            raise ValueError("not a recognized graph document")
        nodes = {}
        for nd in doc["nodes"]:
            if nd["sentinel"]:
                node = EventNode.sentinel(nd["text"])
            else:
                node = EventNode(
                    id=nd["id"],
                    canonical_text=nd["text"],
                    descriptor=EventDescriptor(nd["descriptor"] or {}),
                )
            nodes[node.id] = node
        out: dict[str, list[Edge]] = {}
        for ed in doc["edges"]:
            out.setdefault(ed["src"], []).append(Edge(ed["dst"], ed["p"], ed["count"]))
        out_edges = {src: tuple(sorted(es, key=lambda e: e.dst)) for src, es in out.items()}
        return cls(
            nodes=nodes,
            out_edges=out_edges,
            alpha=doc["alpha"],
            smoothing_support=doc.get("smoothing_support", "observed"),
            segment=SegmentKey(doc.get("segment", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), ensure_ascii=False, sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "EventTransitionGraph":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_graph(
    sessions: Sequence[SessionRecord],
    alpha: float = 5.0,
    *,
    smoothing_support: str = "observed",
    id_fields: Iterable[str] | None = None,
    segment: SegmentKey | None = None,
) -> EventTransitionGraph:
    """Count transitions over sessions and smooth them into a graph.

    When ``segment`` is omitted and every session shares one segment,
    that segment is recorded on the graph; otherwise the empty segment.
    """
    tc = count_transitions(sessions, id_fields)
    if segment is None:
        seen = {s.segment for s in sessions}
        segment = seen.pop() if len(seen) == 1 else SegmentKey()
    out_edges: dict[str, tuple[Edge, ...]] = {}
    for src_id in tc.nodes:
        if src_id == SESSION_END.id:
            continue
        if smoothing_support == "all":
            dsts = [nid for nid in tc.nodes if nid != SESSION_START.id]
        else:
            dsts = [d for d, c in tc.counts.get(src_id, Counter()).items() if c > 0]
        edges = [
            Edge(
                dst,
                smoothed_probability(tc, src_id, dst, alpha, smoothing_support),
                tc.count(src_id, dst),
            )
            for dst in sorted(dsts)
        ]
        out_edges[src_id] = tuple(edges)
    return EventTransitionGraph(
        nodes=dict(tc.nodes),
        out_edges=out_edges,
        alpha=alpha,
        smoothing_support=smoothing_support,
        segment=segment,
    )


def insert_event(
    graph: EventTransitionGraph,
    v_new: EventNode,
    in_edges: Sequence[tuple[str, float]],
    out_edges: Sequence[tuple[str, float]],
) -> EventTransitionGraph:
    """Splice a hypothetical node into a copy of the graph.

    For each in-edge (i, q), source i keeps its relative transition mix
    but donates mass to the newcomer: old probabilities scale by
    1/(1+q) and the new edge gets q/(1+q). The new node's out-row is the
    given weights normalized to sum 1, or a single edge to the end
    sentinel when no out-edges were predicted (walks must terminate).
    The input graph is untouched.
    """
    if v_new.id in graph.nodes:
        raise DuplicateNode(f"node {v_new.id} already present")
    in_sources = [s for s, _ in in_edges]
    out_dests = [d for d, _ in out_edges]
    if len(set(in_sources)) != len(in_sources):
        raise InvalidWeight("duplicate source in in_edges")
    if len(set(out_dests)) != len(out_dests):
        raise InvalidWeight("duplicate destination in out_edges")
    for nid in in_sources + out_dests:
        if nid not in graph.nodes:
            raise InvalidWeight(f"edge references unknown node {nid}")
    if SESSION_END.id in in_sources:
        raise SentinelViolation("end sentinel cannot be an edge source")
    if SESSION_START.id in out_dests:
        raise SentinelViolation("start sentinel cannot be an edge destination")
    for _, q in list(in_edges) + list(out_edges):
        if not (0.0 < q <= 1.0):
            raise InvalidWeight(f"raw weight {q!r} outside (0, 1]")

    nodes = dict(graph.nodes)
    nodes[v_new.id] = v_new
    new_out: dict[str, tuple[Edge, ...]] = dict(graph.out_edges)

    for src_id, q in in_edges:
        scale = 1.0 / (1.0 + q)
        rescaled = [
            Edge(e.dst, e.probability * scale, e.count) for e in graph.edges_from(src_id)
        ]
        rescaled.append(Edge(v_new.id, q * scale, 0))
        new_out[src_id] = tuple(sorted(rescaled, key=lambda e: e.dst))

    if out_edges:
        total = sum(q for _, q in out_edges)
        row = [Edge(dst, q / total, 0) for dst, q in out_edges]
    else:
        row = [Edge(SESSION_END.id, 1.0, 0)]
    new_out[v_new.id] = tuple(sorted(row, key=lambda e: e.dst))

    return EventTransitionGraph(
        nodes=nodes,
        out_edges=new_out,
        alpha=graph.alpha,
        smoothing_support=graph.smoothing_support,
        segment=graph.segment,
    )
