"""Monte-Carlo session sampling on an event transition graph.

Each simulated session is a random walk from the start sentinel, picking
successors by inverse-CDF sampling over the node's out-distribution in
its fixed edge order, until the end sentinel is reached or the step cap
is hit. Session k draws from an RNG substream derived from (seed, k),
so output is bit-stable across runs and thread counts, and growing
n_sessions only appends to the session list.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownField
from .events import SESSION_END, SESSION_START
from .graph import EventTransitionGraph

__all__ = [
    "ConversionRule",
    "SimulationConfig",
    "SimulatedSession",
    "sample_session",
    "simulate",
    "conversion_rate",
    "matching_node_ids",
    "session_to_json_dict",
]

REACHED_END = "reached_end"
MAX_LENGTH = "max_length"


@dataclass(frozen=True)
class ConversionRule:
    """A session converts if any visited node's descriptor matches."""

    field: str = "actionType"
    value: str = "Completed purchase"


@dataclass(frozen=True)
class SimulationConfig:
    n_sessions: int = 10_000
    max_length: int = 100
    seed: int = 0
    conversion: ConversionRule = field(default_factory=ConversionRule)

    def __post_init__(self):
        if self.n_sessions < 1:
            raise ValueError("n_sessions must be >= 1")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class SimulatedSession:
    node_ids: tuple[str, ...]
    terminated_by: str

    def __post_init__(self):
        if self.terminated_by not in (REACHED_END, MAX_LENGTH):
            raise ValueError(f"unknown termination label {self.terminated_by!r}")
        if not self.node_ids or self.node_ids[0] != SESSION_START.id:
            raise ValueError("walk must begin at the start sentinel")
        if SESSION_START.id in self.node_ids[1:]:
            raise ValueError("start sentinel cannot reappear")
        if SESSION_END.id in self.node_ids[:-1]:
            raise ValueError("end sentinel must only appear as the final node")
        reached = self.node_ids[-1] == SESSION_END.id
        if reached != (self.terminated_by == REACHED_END):
            raise ValueError("termination label disagrees with node sequence")


class _Sampler:
    """Per-graph cumulative distribution tables for inverse-CDF draws."""

    def __init__(self, graph: EventTransitionGraph):
        self._tables: dict[str, tuple[list[str], np.ndarray]] = {}
        for src in graph.nodes:
            edges = graph.edges_from(src)
            if edges:
                dsts = [e.dst for e in edges]
                cum = np.cumsum([e.probability for e in edges])
                self._tables[src] = (dsts, cum)

    def step(self, src: str, rng: np.random.Generator) -> str:
        dsts, cum = self._tables[src]
        idx = int(np.searchsorted(cum, rng.random(), side="right"))
        if idx >= len(dsts):  # row sum may fall a few ulp short of 1
            idx = len(dsts) - 1
        return dsts[idx]

    def walk(self, rng: np.random.Generator, max_length: int) -> SimulatedSession:
        node_ids = [SESSION_START.id]
        current = SESSION_START.id
        terminated = MAX_LENGTH
        for _ in range(max_length):
            current = self.step(current, rng)
            node_ids.append(current)
            if current == SESSION_END.id:
                terminated = REACHED_END
                break
        return SimulatedSession(node_ids=tuple(node_ids), terminated_by=terminated)


def sample_session(
    graph: EventTransitionGraph, rng: np.random.Generator, max_length: int = 100
) -> SimulatedSession:
    """One random walk using the caller's RNG (see simulate for streams)."""
    return _Sampler(graph).walk(rng, max_length)


def _substream(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))


def simulate(
    graph: EventTransitionGraph,
    config: SimulationConfig,
    *,
    threads: int = 1,
) -> list[SimulatedSession]:
    """Sample config.n_sessions walks, ordered by session index.

    Thread count affects wall time only: session k is a pure function of
    (graph, seed, k).
    """
    sampler = _Sampler(graph)

    def one(k: int) -> SimulatedSession:
        return sampler.walk(_substream(config.seed, k), config.max_length)

    if threads <= 1:
        return [one(k) for k in range(config.n_sessions)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(config.n_sessions)))


def matching_node_ids(graph: EventTransitionGraph, rule: ConversionRule) -> set[str]:
    """Ids of nodes whose descriptor satisfies the rule.

    Raises UnknownField if no node in the graph carries the rule's field
    at all (a typo'd field would otherwise silently read as rate 0).
    """
    field_known = False
    matches = set()
    for nid, node in graph.nodes.items():
        if node.descriptor is None:
            continue
        if rule.field in node.descriptor:
            field_known = True
            if node.descriptor[rule.field] == rule.value:
                matches.add(nid)
    if not field_known:
        raise UnknownField(f"no node descriptor has field {rule.field!r}")
    return matches


def conversion_rate(
    sessions: Sequence[SimulatedSession],
    rule: ConversionRule,
    graph: EventTransitionGraph,
) -> float:
    """Fraction of sessions visiting at least one rule-matching node."""
    matches = matching_node_ids(graph, rule)
    if not sessions:
        return 0.0
    hits = sum(1 for s in sessions if any(n in matches for n in s.node_ids))
    return hits / len(sessions)


def session_to_json_dict(
    session: SimulatedSession,
    *,
    index: int | None = None,
    graph: EventTransitionGraph | None = None,
    include_text: bool = False,
) -> dict:
    """JSONL row for one session; texts resolved from the graph on request."""
    out: dict = {}
    if index is not None:
        out["index"] = index
    out["terminated_by"] = session.terminated_by
    out["node_ids"] = list(session.node_ids)
    if include_text:
        if graph is None:
            raise ValueError("include_text requires the graph")
        out["texts"] = [graph.nodes[n].canonical_text for n in session.node_ids]
    return out
