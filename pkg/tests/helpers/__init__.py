"""Shared builders for test fixtures."""

from clicksim.events import (
    SESSION_END,
    SESSION_START,
    EventDescriptor,
    EventNode,
    SegmentKey,
    SessionRecord,
)
from clicksim.graph import Edge, EventTransitionGraph

DEFAULT_SEGMENT = SegmentKey(
    {"country": "United States", "browser": "Chrome", "source": "Direct"}
)


def hand_graph(rows):
    """Graph from {name: {name: p}} rows; START/END name the sentinels.

    Returns (graph, named) where named maps row names to EventNodes.
    """
    named = {"START": SESSION_START, "END": SESSION_END}
    for name in set(rows) | {d for row in rows.values() for d in row}:
        if name not in named:
            named[name] = EventNode.from_descriptor({"actionType": name})
    nodes = {node.id: node for node in named.values()}
    out_edges = {}
    for src, row in rows.items():
        edges = [Edge(dst=named[d].id, probability=p, count=0) for d, p in row.items()]
        out_edges[named[src].id] = tuple(sorted(edges, key=lambda e: e.dst))
    out_edges.setdefault(SESSION_END.id, ())
    return EventTransitionGraph(nodes=nodes, out_edges=out_edges, alpha=0.0), named


def descriptor(name: str) -> EventDescriptor:
    return EventDescriptor({"actionType": name})


def session(names, session_id="s", segment=DEFAULT_SEGMENT, t0=1_000):
    events = tuple((t0 + 10 * i, descriptor(n)) for i, n in enumerate(names))
    return SessionRecord(session_id=session_id, segment=segment, events=events)


def sessions(list_of_name_lists, segment=DEFAULT_SEGMENT):
    return [
        session(names, session_id=f"s{i}", segment=segment)
        for i, names in enumerate(list_of_name_lists)
    ]
