"""Canonical event, segment, and session types.

Every stage of the pipeline identifies an event by the canonical JSON
serialization of its descriptor: keys sorted lexicographically, minimal
RFC 8259 escaping, non-ASCII kept literal (UTF-8). Node ids are content
hashes of that text, so identity is stable across runs and processes.
The exact format is documented in docs/canonical-text.md.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "EventDescriptor",
    "EventNode",
    "SegmentKey",
    "SessionRecord",
    "canonicalize",
    "node_id",
    "SESSION_START",
    "SESSION_END",
    "SESSION_START_TEXT",
    "SESSION_END_TEXT",
]

SESSION_START_TEXT = "session start"
SESSION_END_TEXT = "session end"


class _CanonicalMap(Mapping):
    """Immutable string->string map with key-order-independent identity.

    Entries are stored sorted by key, so two maps built from the same
    pairs in any insertion order compare and hash equal.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        if isinstance(entries, Mapping):
            pairs = list(entries.items())
        else:
            pairs = list(entries)
        for k, v in pairs:
            if not isinstance(k, str) or not k:
                raise ValueError(f"field names must be non-empty strings, got {k!r}")
            if not isinstance(v, str):
                raise ValueError(f"field values must be strings, got {v!r} for key {k!r}")
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate field names")
        object.__setattr__(self, "_entries", tuple(sorted(pairs)))

    def __getitem__(self, key: str) -> str:
        for k, v in self._entries:
            if k == key:
                return v
        raise KeyError(key)

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __hash__(self) -> int:
        return hash(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, _CanonicalMap):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return dict(self._entries) == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        return f"{type(self).__name__}({dict(self._entries)!r})"

    @property
    def canonical_text(self) -> str:
        return canonicalize(self)


class EventDescriptor(_CanonicalMap):
    """Structured description of one user event, e.g. actionType/pageTitle/... fields."""

    def restrict(self, fields: Iterable[str]) -> "EventDescriptor":
        """Project onto a field whitelist; whitelisted keys absent here are skipped."""
        wanted = set(fields)
        return EventDescriptor((k, v) for k, v in self.items() if k in wanted)


class SegmentKey(_CanonicalMap):
    """User-cohort attributes (country, browser, source, ...); same canonical rules as events."""


def canonicalize(descriptor: Mapping[str, str]) -> str:
    """Canonical serialization: keys sorted, deterministic JSON escaping, UTF-8.

    Idempotent in the sense that equal mappings always yield the same
    byte sequence; the empty mapping yields ``{}``.
    """
    return json.dumps(dict(descriptor), sort_keys=True, ensure_ascii=False)


def node_id(canonical_text: str) -> str:
    """Stable content hash of a canonical text.

    SHA-256 of the UTF-8 bytes, first 16 hex digits. The function is
    fixed for the lifetime of the on-disk formats; equal texts always
    map to equal ids.
    """
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class EventNode:
    """A graph vertex: canonical text plus the descriptor it came from.

    ``id`` is always ``node_id(canonical_text)``. Exactly two sentinel
    nodes exist per graph, with fixed plain-string canonical texts;
    sentinel texts never collide with descriptor serializations because
    the latter always start with ``{``.
    """

    id: str
    canonical_text: str
    descriptor: EventDescriptor = field(default_factory=EventDescriptor)
    is_sentinel: bool = False

    def __post_init__(self):
        if self.id != node_id(self.canonical_text):
            raise ValueError("id is not the content hash of canonical_text")

    @classmethod
    def from_descriptor(
        cls, descriptor: EventDescriptor, id_fields: Iterable[str] | None = None
    ) -> "EventNode":
        """Build a node, optionally coarsening identity to a field whitelist."""
        if id_fields is not None:
            descriptor = descriptor.restrict(id_fields)
        text = canonicalize(descriptor)
        return cls(id=node_id(text), canonical_text=text, descriptor=descriptor)

    @classmethod
    def sentinel(cls, text: str) -> "EventNode":
        return cls(id=node_id(text), canonical_text=text, is_sentinel=True)


SESSION_START = EventNode.sentinel(SESSION_START_TEXT)
SESSION_END = EventNode.sentinel(SESSION_END_TEXT)


@dataclass(frozen=True)
class SessionRecord:
    """One user session: ordered events plus the segment they belong to."""

    session_id: str
    segment: SegmentKey
    events: tuple[tuple[int, EventDescriptor], ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError("session must contain at least one event")
        times = [t for t, _ in self.events]
        if any(a > b for a, b in zip(times, times[1:])):
            raise ValueError("events must be sorted non-decreasing by timestamp")

    @property
    def start_ts(self) -> int:
        return self.events[0][0]
