"""Clickstream log parsing, sessionization, and temporal partitioning.

The input is newline-delimited JSON, one record per line, in the schema
documented in docs/log-schema.md. Records are grouped into sessions by
``sessionId``, ordered by timestamp, and assigned to train/validation/
test windows by the timestamp of their first event. A separate adapter
converts raw GA-style export rows (nested visit objects with hit lists)
into the flat record schema.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ConflictingSegmentWarning, MalformedRecord
from .events import EventDescriptor, SegmentKey, SessionRecord

__all__ = [
    "SEGMENT_FIELDS",
    "LogRecord",
    "TemporalSplit",
    "Partition",
    "parse_log",
    "sessionize",
    "partition",
    "group_by_segment",
    "adapt_ga360",
    "dump_sessions",
    "load_sessions",
]

SEGMENT_FIELDS = ("country", "browser", "source")


@dataclass(frozen=True)
class LogRecord:
    """One event occurrence, as parsed from a single input line."""

    session_id: str
    timestamp: int
    segment: SegmentKey
    event: EventDescriptor

    def __post_init__(self):
        if not self.session_id:
            raise ValueError("session_id must be non-empty")


@dataclass(frozen=True)
class TemporalSplit:
    """Three half-open [start, end) windows in epoch milliseconds."""

    train: tuple[int, int]
    validation: tuple[int, int]
    test: tuple[int, int]

    def __post_init__(self):
        for name, (start, end) in self.windows().items():
            if start >= end:
                raise ValueError(f"{name} window is empty: [{start}, {end})")
        if self.train[1] > self.validation[0]:
            raise ValueError("train window must end before validation begins")
        if self.validation[1] > self.test[0]:
            raise ValueError("validation window must end before test begins")

    def windows(self) -> dict[str, tuple[int, int]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def assign(self, timestamp: int) -> str | None:
        """Window name containing the timestamp, or None if outside all."""
        for name, (start, end) in self.windows().items():
            if start <= timestamp < end:
                return name
        return None


def _parse_record(obj, line_no: int) -> LogRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")
    session_id = obj.get("sessionId")
    if not isinstance(session_id, str) or not session_id:
        raise MalformedRecord(line_no, "missing or empty sessionId")
    ts = obj.get("ts")
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise MalformedRecord(line_no, "ts must be an integer (epoch ms)")
    segment = obj.get("segment")
    if not isinstance(segment, dict):
        raise MalformedRecord(line_no, "missing segment object")
    for field in SEGMENT_FIELDS:
        if not isinstance(segment.get(field), str):
            raise MalformedRecord(line_no, f"segment.{field} must be a string")
    event = obj.get("event")
    if not isinstance(event, dict) or not event:
        raise MalformedRecord(line_no, "missing or empty event object")
    try:
        descriptor = EventDescriptor(event)
        segment_key = SegmentKey({f: segment[f] for f in SEGMENT_FIELDS})
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, str(exc)) from exc
    return LogRecord(session_id=session_id, timestamp=ts, segment=segment_key, event=descriptor)


def parse_log(
    lines: Iterable[str],
    *,
    strict: bool = False,
    errors: list[MalformedRecord] | None = None,
) -> Iterator[LogRecord]:
    """Yield LogRecords from JSONL lines, in input order.

    Malformed lines are appended to ``errors`` (when given) and skipped;
    with strict=True the first one raises instead. Blank lines are
    ignored. Line numbers are 1-based.
    """
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
            yield _parse_record(obj, line_no)
        except MalformedRecord as bad:
            if strict:
                raise
            if errors is not None:
                errors.append(bad)


def sessionize(
    records: Iterable[LogRecord],
    *,
    dedupe_consecutive: bool = False,
) -> list[SessionRecord]:
    """Group records into SessionRecords, one per distinct session_id.

    Events are ordered by timestamp (ties broken by canonical event
    text, so the result does not depend on input order). The session's
    segment comes from its first record; later records that disagree
    trigger a ConflictingSegmentWarning and are kept with the first
    segment. Sessions are returned sorted by session_id.
    """
    buckets: dict[str, list[LogRecord]] = {}
    for record in records:
        buckets.setdefault(record.session_id, []).append(record)

    sessions = []
    for session_id in sorted(buckets):
        group = sorted(
            buckets[session_id],
            key=lambda r: (r.timestamp, r.event.canonical_text, r.segment.canonical_text),
        )
        segment = group[0].segment
        if any(r.segment != segment for r in group[1:]):
            warnings.warn(
                f"session {session_id!r} has conflicting segment fields; keeping the first",
                ConflictingSegmentWarning,
                stacklevel=2,
            )
        events: list[tuple[int, EventDescriptor]] = []
        for r in group:
            if dedupe_consecutive and events and events[-1][1] == r.event:
                continue
            events.append((r.timestamp, r.event))
        sessions.append(
            SessionRecord(session_id=session_id, segment=segment, events=tuple(events))
        )
    return sessions


@dataclass(frozen=True)
class Partition:
    """Sessions bucketed by window, plus how many fell outside all three."""

    train: tuple[SessionRecord, ...]
    validation: tuple[SessionRecord, ...]
    test: tuple[SessionRecord, ...]
    n_dropped: int

    def __iter__(self):
        return iter((self.train, self.validation, self.test))


def partition(sessions: Iterable[SessionRecord], split: TemporalSplit) -> Partition:
    """Assign each session to the window containing its FIRST event.

    A session straddling a boundary stays in the window it started in.
    Sessions starting outside every window are dropped and counted.
    """
    buckets: dict[str, list[SessionRecord]] = {"train": [], "validation": [], "test": []}
    dropped = 0
    for session in sessions:
        name = split.assign(session.start_ts)
        if name is None:
            dropped += 1
        else:
            buckets[name].append(session)
    return Partition(
        train=tuple(buckets["train"]),
        validation=tuple(buckets["validation"]),
        test=tuple(buckets["test"]),
        n_dropped=dropped,
    )


def group_by_segment(sessions: Iterable[SessionRecord]) -> dict[SegmentKey, list[SessionRecord]]:
    """Split sessions into per-segment lists (graphs are per segment)."""
    groups: dict[SegmentKey, list[SessionRecord]] = {}
    for session in sessions:
        groups.setdefault(session.segment, []).append(session)
    return groups


def dump_sessions(sessions: Iterable[SessionRecord]) -> Iterator[str]:
    """JSONL lines for a sessions artifact; inverse of load_sessions.

    Line order follows input order and key order is canonical, so equal
    session lists always serialize to identical bytes.
    """
    for s in sessions:
        yield json.dumps(
            {
                "sessionId": s.session_id,
                "segment": dict(s.segment),
                "events": [[ts, dict(d)] for ts, d in s.events],
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def load_sessions(lines: Iterable[str]) -> list[SessionRecord]:
    """Parse a sessions artifact back into SessionRecords.

    Any structural defect raises MalformedRecord with the 1-based line
    number; blank lines are skipped.
    """
    out = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
        try:
            if not isinstance(obj, dict):
                raise ValueError("line is not an object")
            session_id = obj["sessionId"]
            if not isinstance(session_id, str) or not session_id:
                raise ValueError("missing or empty sessionId")
            events = []
            for ts, fields in obj["events"]:
                if isinstance(ts, bool) or not isinstance(ts, int):
                    raise ValueError(f"timestamp {ts!r} is not an integer")
                events.append((ts, EventDescriptor(fields)))
            out.append(
                SessionRecord(
                    session_id=session_id,
                    segment=SegmentKey(obj["segment"]),
                    events=tuple(events),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
    return out


# Meanings of the numeric e-commerce action codes in GA-style exports.
# Code "0" means "no action" there, so those hits fall back to the hit's
# page/event type as the action name.
GA_ACTION_NAMES = {
    "1": "Clicked through product list",
    "2": "Viewed product details",
    "3": "Added product to cart",
    "4": "Removed product from cart",
    "5": "Started checkout",
    "6": "Completed purchase",
    "7": "Refunded purchase",
    "8": "Entered checkout options",
}


def _adapt_visit(obj, line_no: int) -> list[dict]:
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "visit is not a JSON object")
    try:
        visitor = obj["fullVisitorId"]
        visit_id = obj["visitId"]
        start_s = obj["visitStartTime"]
        country = obj["geoNetwork"]["country"]
        browser = obj["device"]["browser"]
        source = obj["trafficSource"]["source"]
        hits = obj["hits"]
    except (KeyError, TypeError) as exc:
        raise MalformedRecord(line_no, f"missing visit field: {exc}") from exc
    if isinstance(start_s, bool) or not isinstance(start_s, int):
        raise MalformedRecord(line_no, "visitStartTime must be an integer (epoch s)")
    if not isinstance(hits, list):
        raise MalformedRecord(line_no, "hits must be a list")
    records = []
    for hit in hits:
        try:
            offset_ms = hit.get("time", 0)
            code = str(hit["eCommerceAction"]["action_type"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedRecord(line_no, f"missing hit field: {exc}") from exc
        if isinstance(offset_ms, bool) or not isinstance(offset_ms, int):
            raise MalformedRecord(line_no, "hit time must be an integer (ms offset)")
        action = GA_ACTION_NAMES.get(code)
        if action is None:
            hit_type = hit.get("type")
            if not isinstance(hit_type, str) or not hit_type:
                raise MalformedRecord(line_no, f"hit has no action name for code {code!r}")
            action = hit_type
        records.append(
            {
                "sessionId": f"{visitor}:{visit_id}",
                "ts": start_s * 1000 + offset_ms,
                "segment": {"country": country, "browser": browser, "source": source},
                "event": {"actionType": action},
            }
        )
    return records


def adapt_ga360(
    lines: Iterable[str],
    *,
    strict: bool = False,
    errors: list[MalformedRecord] | None = None,
) -> Iterator[dict]:
    """Convert GA-style visit rows (JSONL) into flat log-schema dicts.

    Each visit row fans out to one record per hit; sessionId joins the
    visitor id and visit id, and timestamps combine the visit start
    (seconds) with each hit's millisecond offset. The column mapping is
    documented in docs/log-schema.md.
    """
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
            yield from _adapt_visit(obj, line_no)
        except MalformedRecord as bad:
            if strict:
                raise
            if errors is not None:
                errors.append(bad)
