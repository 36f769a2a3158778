"""Event logs as multisets of traces, label cleaning, and XES/JSONL serialization.

Only the control-flow view is modeled: an event is its activity label.
Timestamps, resources, and other attributes are ignored on read and omitted
on write.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class LabelError(ValueError):
    """A label is empty (or would be empty) after cleaning."""


class LogParseError(ValueError):
    """Malformed XES or JSONL log input."""


_WS = re.compile(r"\s+")
_DISALLOWED = re.compile(r"[^a-z0-9 ]")
# lowercase alphanumeric words separated by single spaces
_NORMALIZED = re.compile(r"[a-z0-9]+( [a-z0-9]+)*")


def normalize_label(raw: str) -> str:
    """Clean an activity label to the canonical form used across the toolkit.

    Lowercases, turns every whitespace run (including line breaks) into one
    space, drops characters other than ASCII letters, digits and space, then
    collapses and trims. Idempotent.
    """
    text = _WS.sub(" ", raw.lower())
    text = _DISALLOWED.sub("", text)
    text = _WS.sub(" ", text).strip()
    if not text:
        raise LabelError(f"label is empty after cleaning: {raw!r}")
    return text


def is_normalized(label: str) -> bool:
    return _NORMALIZED.fullmatch(label) is not None


@dataclass(frozen=True)
class Event:
    """A single event, reduced to its normalized activity label."""

    label: str

    def __post_init__(self) -> None:
        if not is_normalized(self.label):
            raise LabelError(f"event label is not normalized: {self.label!r}")


@dataclass(frozen=True)
class Trace:
    """An ordered sequence of events with an opaque id.

    Empty traces are representable (degenerate tests need them) but pipeline
    operations reject them.
    """

    id: str
    events: tuple[Event, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.events)

    def __len__(self) -> int:
        return len(self.events)

    @classmethod
    def of(cls, trace_id: str, labels: Iterable[str]) -> "Trace":
        return cls(trace_id, tuple(Event(l) for l in labels))


@dataclass(frozen=True)
class EventLog:
    """A named multiset of traces. Trace ids must be unique within the log."""

    name: str
    traces: tuple[Trace, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for t in self.traces:
            if t.id in seen:
                raise LogParseError(f"duplicate trace id {t.id!r} in log {self.name!r}")
            seen.add(t.id)

    @property
    def alphabet(self) -> frozenset[str]:
        """Union of activity labels over all traces."""
        return frozenset(l for t in self.traces for l in t.labels)

    def variants(self) -> tuple[tuple[str, ...], ...]:
        """Distinct label sequences, sorted for determinism."""
        return tuple(sorted(set(t.labels for t in self.traces)))

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @classmethod
    def from_sequences(
        cls,
        name: str,
        sequences: Iterable[Sequence[str]],
        ids: Iterable[str] | None = None,
    ) -> "EventLog":
        seqs = list(sequences)
        id_list = list(ids) if ids is not None else [str(i + 1) for i in range(len(seqs))]
        return cls(name, tuple(Trace.of(i, s) for i, s in zip(id_list, seqs)))


# --- XES subset -------------------------------------------------------------
#
# Recognized structure: log / trace / event elements plus <string
# key="concept:name" value=.../> attributes. Namespaces are tolerated by
# matching on local tag names.


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _concept_name(element: ET.Element) -> str | None:
    for child in element:
        if _local(child.tag) == "string" and child.get("key") == "concept:name":
            return child.get("value")
    return None


def parse_xes(document: bytes | str, name: str = "log") -> EventLog:
    """Parse an XES document (bytes or text) into an EventLog.

    Labels go through normalize_label; trace ids come from the trace-level
    concept:name attribute or are synthesized as 1-based indices.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogParseError(f"malformed XES (line {line}, column {col}): {exc.msg}") from None
    if _local(root.tag) != "log":
        raise LogParseError(f"expected <log> root element, found <{_local(root.tag)}>")

    log_name = _concept_name(root) or name
    traces = []
    index = 0
    for trace_el in root:
        if _local(trace_el.tag) != "trace":
            continue
        index += 1
        trace_id = _concept_name(trace_el) or str(index)
        events = []
        for event_el in trace_el:
            if _local(event_el.tag) != "event":
                continue
            activity = _concept_name(event_el)
            if activity is None:
                raise LogParseError(f"missing activity name in trace {trace_id}")
            events.append(Event(normalize_label(activity)))
        traces.append(Trace(trace_id, tuple(events)))
    return EventLog(log_name, tuple(traces))


def write_xes(log: EventLog) -> bytes:
    """Serialize an EventLog to an XES byte stream; parse_xes round-trips it."""
    root = ET.Element("log", {"xes.version": "1.0"})
    ET.SubElement(root, "string", {"key": "concept:name", "value": log.name})
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        ET.SubElement(trace_el, "string", {"key": "concept:name", "value": trace.id})
        for event in trace.events:
            event_el = ET.SubElement(trace_el, "event")
            ET.SubElement(event_el, "string", {"key": "concept:name", "value": event.label})
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


# --- JSONL ------------------------------------------------------------------


def write_jsonl_log(log: EventLog) -> str:
    """One trace per line: {"id": ..., "events": [...]}."""
    lines = []
    for trace in log.traces:
        lines.append(json.dumps({"id": trace.id, "events": list(trace.labels)}))
    return "".join(line + "\n" for line in lines)


def read_jsonl_log(
    text: str, name: str = "log", allow_empty_traces: bool = False
) -> EventLog:
    """Parse the JSONL trace format. Empty event lists need the permissive flag."""
    traces = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"line {lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict) or "id" not in obj or "events" not in obj:
            raise LogParseError(f"line {lineno}: expected object with 'id' and 'events'")
        events = obj["events"]
        if not isinstance(events, list) or not all(isinstance(e, str) for e in events):
            raise LogParseError(f"line {lineno}: 'events' must be a list of strings")
        if not events and not allow_empty_traces:
            raise LogParseError(f"line {lineno}: trace {obj['id']!r} has no events")
        traces.append(Trace.of(str(obj["id"]), [normalize_label(e) for e in events]))
    return EventLog(name, tuple(traces))


def load_xes(path) -> EventLog:
    with open(path, "rb") as fh:
        return parse_xes(fh.read())


def save_xes(log: EventLog, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_xes(log))
