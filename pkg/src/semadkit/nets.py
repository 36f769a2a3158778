"""Workflow nets: parsing, soundness checking, playout, and truth extraction.

A workflow net here is a Petri net with a single source and sink place.
Playout enumerates (or samples) firing sequences from the initial marking to
the final marking; the emitted labels of non-silent transitions form the
trace language that ground-truth constraints are extracted from.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .constraints import Constraint, ConstraintSet, candidate_constraints, evaluate, is_activated
from .logs import EventLog, LabelError, Trace, is_normalized, normalize_label


class NetStructureError(ValueError):
    """Structurally invalid workflow net."""


class PlayoutError(RuntimeError):
    """Random playout failed to produce the requested traces."""


class TruncatedLanguageError(RuntimeError):
    """Bounded playout did not exhaust the trace language."""


@dataclass(frozen=True)
class Transition:
    id: str
    label: str | None  # None marks a silent transition


MarkingDict = dict[str, int]
FrozenMarking = tuple[tuple[str, int], ...]


def _freeze(marking: MarkingDict) -> FrozenMarking:
    return tuple(sorted((p, c) for p, c in marking.items() if c > 0))


@dataclass(frozen=True)
class Marking:
    """An immutable token assignment (only positive counts are stored)."""

    tokens: FrozenMarking

    @classmethod
    def from_counts(cls, counts: MarkingDict) -> "Marking":
        if any(c < 0 for c in counts.values()):
            raise ValueError("negative token count")
        return cls(_freeze(counts))

    def count(self, place: str) -> int:
        for p, c in self.tokens:
            if p == place:
                return c
        return 0

    def as_dict(self) -> MarkingDict:
        return dict(self.tokens)


@dataclass(frozen=True)
class WorkflowNet:
    places: frozenset[str]
    transitions: tuple[Transition, ...]
    arcs: frozenset[tuple[str, str]]
    source: str
    sink: str

    @cached_property
    def _by_id(self) -> dict[str, Transition]:
        return {t.id: t for t in self.transitions}

    @cached_property
    def _sorted_transitions(self) -> tuple[Transition, ...]:
        return tuple(sorted(self.transitions, key=lambda t: t.id))

    @cached_property
    def _preset(self) -> dict[str, tuple[str, ...]]:
        pre: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        for src, dst in sorted(self.arcs):
            if dst in pre:
                pre[dst].append(src)
        return {k: tuple(v) for k, v in pre.items()}

    @cached_property
    def _postset(self) -> dict[str, tuple[str, ...]]:
        post: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        for src, dst in sorted(self.arcs):
            if src in post:
                post[src].append(dst)
        return {k: tuple(v) for k, v in post.items()}

    def activity_labels(self) -> tuple[str, ...]:
        """Sorted distinct labels of the non-silent transitions."""
        return tuple(sorted({t.label for t in self.transitions if t.label is not None}))

    def initial_marking(self) -> MarkingDict:
        return {self.source: 1}

    def final_marking(self) -> MarkingDict:
        return {self.sink: 1}

    def enabled(self, marking: MarkingDict) -> list[Transition]:
        out = []
        for t in self._sorted_transitions:
            pre = self._preset[t.id]
            if pre and all(marking.get(p, 0) >= 1 for p in pre):
                out.append(t)
        return out

    def fire(self, marking: MarkingDict, t: Transition) -> MarkingDict:
        new = dict(marking)
        for p in self._preset[t.id]:
            new[p] -= 1
            if new[p] == 0:
                del new[p]
        for p in self._postset[t.id]:
            new[p] = new.get(p, 0) + 1
        return new

    def to_json(self) -> str:
        obj = {
            "places": sorted(self.places),
            "transitions": [
                {"id": t.id, "label": t.label} for t in self._sorted_transitions
            ],
            "arcs": sorted([list(a) for a in self.arcs]),
            "source": self.source,
            "sink": self.sink,
        }
        return json.dumps(obj, indent=2) + "\n"


def _validate(net: WorkflowNet) -> None:
    node_ids = {p for p in net.places} | {t.id for t in net.transitions}
    if len(node_ids) != len(net.places) + len(net.transitions):
        raise NetStructureError("place and transition ids must be disjoint and unique")

    transition_ids = {t.id for t in net.transitions}
    for src, dst in net.arcs:
        src_place, dst_place = src in net.places, dst in net.places
        src_trans, dst_trans = src in transition_ids, dst in transition_ids
        if not ((src_place and dst_trans) or (src_trans and dst_place)):
            raise NetStructureError(f"arc ({src!r}, {dst!r}) must connect a place and a transition")

    incoming = {dst for _, dst in net.arcs}
    outgoing = {src for src, _ in net.arcs}
    sources = sorted(p for p in net.places if p not in incoming)
    sinks = sorted(p for p in net.places if p not in outgoing)
    if len(sources) == 0:
        raise NetStructureError("no source place")
    if len(sources) > 1:
        raise NetStructureError(f"multiple source places: {sources}")
    if len(sinks) == 0:
        raise NetStructureError("no sink place")
    if len(sinks) > 1:
        raise NetStructureError(f"multiple sink places: {sinks}")
    if sources[0] != net.source:
        raise NetStructureError(f"declared source {net.source!r} but {sources[0]!r} has no incoming arcs")
    if sinks[0] != net.sink:
        raise NetStructureError(f"declared sink {net.sink!r} but {sinks[0]!r} has no outgoing arcs")

    succ: dict[str, set[str]] = {}
    pred: dict[str, set[str]] = {}
    for src, dst in net.arcs:
        succ.setdefault(src, set()).add(dst)
        pred.setdefault(dst, set()).add(src)

    def reachable(start: str, adjacency: dict[str, set[str]]) -> set[str]:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    forward = reachable(net.source, succ)
    backward = reachable(net.sink, pred)
    for node in sorted(node_ids):
        if node not in forward or node not in backward:
            raise NetStructureError(f"node {node!r} is not on a path from source to sink")


def parse_net(document: bytes | str) -> WorkflowNet:
    """Parse and validate the workflow-net JSON format.

    Unnormalized transition labels are auto-normalized with a warning rather
    than rejected.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NetStructureError(f"invalid net JSON: {exc.msg} (line {exc.lineno})") from None
    for key in ("places", "transitions", "arcs", "source", "sink"):
        if key not in obj:
            raise NetStructureError(f"missing key {key!r}")

    places = [str(p) for p in obj["places"]]
    if len(set(places)) != len(places):
        raise NetStructureError("duplicate place ids")

    transitions = []
    for t in obj["transitions"]:
        if not isinstance(t, dict) or "id" not in t or "label" not in t:
            raise NetStructureError(f"transition entries need 'id' and 'label': {t!r}")
        label = t["label"]
        if label is not None:
            try:
                cleaned = normalize_label(str(label))
            except LabelError:
                raise NetStructureError(f"transition {t['id']!r} label cleans to empty") from None
            if not is_normalized(str(label)):
                warnings.warn(
                    f"transition {t['id']!r} label {label!r} auto-normalized to {cleaned!r}",
                    stacklevel=2,
                )
            label = cleaned
        transitions.append(Transition(str(t["id"]), label))
    if len({t.id for t in transitions}) != len(transitions):
        raise NetStructureError("duplicate transition ids")

    arcs = set()
    for arc in obj["arcs"]:
        if not isinstance(arc, (list, tuple)) or len(arc) != 2:
            raise NetStructureError(f"arcs must be [from, to] pairs: {arc!r}")
        arcs.add((str(arc[0]), str(arc[1])))

    net = WorkflowNet(
        places=frozenset(places),
        transitions=tuple(transitions),
        arcs=frozenset(arcs),
        source=str(obj["source"]),
        sink=str(obj["sink"]),
    )
    _validate(net)
    return net


def load_net(path) -> WorkflowNet:
    with open(path, "rb") as fh:
        return parse_net(fh.read())


# --- soundness ----------------------------------------------------------------


class Soundness(Enum):
    SOUND = "sound"
    UNSOUND = "unsound"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SoundnessResult:
    status: Soundness
    reason: str | None = None


def check_soundness(net: WorkflowNet, state_bound: int = 100_000) -> SoundnessResult:
    """Classical soundness on the bounded reachability graph.

    Sound iff the final marking is reachable from every reachable marking, no
    reachable marking strictly covers the final marking, and no transition is
    dead. Returns Unknown when the exploration hits state_bound.
    """
    initial = net.initial_marking()
    final_key = _freeze(net.final_marking())

    edges: dict[FrozenMarking, list[FrozenMarking]] = {}
    fired: set[str] = set()
    seen: dict[FrozenMarking, MarkingDict] = {_freeze(initial): initial}
    frontier = [initial]
    while frontier:
        marking = frontier.pop()
        key = _freeze(marking)
        succs = edges.setdefault(key, [])
        for t in net.enabled(marking):
            fired.add(t.id)
            nxt = net.fire(marking, t)
            nxt_key = _freeze(nxt)
            succs.append(nxt_key)
            if nxt_key not in seen:
                if len(seen) >= state_bound:
                    return SoundnessResult(Soundness.UNKNOWN, f"state bound {state_bound} exceeded")
                seen[nxt_key] = nxt
                frontier.append(nxt)

    sink = net.sink
    for key, marking in seen.items():
        if key == final_key:
            continue
        if marking.get(sink, 0) >= 1:
            return SoundnessResult(
                Soundness.UNSOUND, f"improper completion: marking {key} covers the final marking"
            )

    if final_key not in seen:
        return SoundnessResult(Soundness.UNSOUND, "final marking unreachable")

    can_finish = {final_key}
    reverse: dict[FrozenMarking, list[FrozenMarking]] = {}
    for src, dsts in edges.items():
        for dst in dsts:
            reverse.setdefault(dst, []).append(src)
    frontier2 = [final_key]
    while frontier2:
        key = frontier2.pop()
        for prev in reverse.get(key, ()):
            if prev not in can_finish:
                can_finish.add(prev)
                frontier2.append(prev)
    stuck = sorted(set(seen) - can_finish)
    if stuck:
        return SoundnessResult(
            Soundness.UNSOUND, f"option to complete violated from marking {stuck[0]}"
        )

    dead = sorted(t.id for t in net.transitions if t.id not in fired)
    if dead:
        return SoundnessResult(Soundness.UNSOUND, f"dead transition: {dead[0]}")
    return SoundnessResult(Soundness.SOUND)


# --- playout ------------------------------------------------------------------


@dataclass(frozen=True)
class BoundedLanguage:
    """Distinct complete traces found within the playout bounds."""

    traces: tuple[tuple[str, ...], ...]
    complete: bool


_EXPANSION_CAP = 2_000_000  # failsafe against pathological unbounded nets


def playout_exhaustive(
    net: WorkflowNet, max_len: int = 50, max_variants: int = 5000
) -> BoundedLanguage:
    """Depth-first enumeration of the bounded trace language.

    Silent transitions fire without emitting; silent cycles are pruned by
    marking-revisit detection between emissions. complete is False iff any
    bound cut the search.
    """
    if max_len <= 0 or max_variants <= 0:
        raise ValueError("bounds must be positive")
    initial = net.initial_marking()
    final = net.final_marking()
    found: set[tuple[str, ...]] = set()
    truncated = False
    expansions = 0

    stack: list[tuple[MarkingDict, tuple[str, ...], frozenset[FrozenMarking]]] = [
        (initial, (), frozenset({_freeze(initial)}))
    ]
    while stack:
        marking, trace, silent_seen = stack.pop()
        if marking == final:
            if trace not in found:
                if len(found) >= max_variants:
                    truncated = True
                    break
                found.add(trace)
            continue
        expansions += 1
        if expansions > _EXPANSION_CAP:
            truncated = True
            break
        for t in reversed(net.enabled(marking)):
            if t.label is None:
                nxt = net.fire(marking, t)
                key = _freeze(nxt)
                if key in silent_seen:
                    continue
                stack.append((nxt, trace, silent_seen | {key}))
            else:
                if len(trace) >= max_len:
                    truncated = True
                    continue
                nxt = net.fire(marking, t)
                stack.append((nxt, trace + (t.label,), frozenset({_freeze(nxt)})))

    if not found:
        if truncated:
            warnings.warn("final marking not reached within bounds; language is empty and incomplete")
        else:
            warnings.warn("net has no complete firing sequence; language is empty")
    return BoundedLanguage(traces=tuple(sorted(found)), complete=not truncated)


def playout_sample(
    net: WorkflowNet,
    n_traces: int,
    max_len: int = 50,
    seed: int = 0,
    name: str = "playout",
) -> EventLog:
    """Sample traces by uniform random choice among enabled transitions.

    Walks that deadlock or exceed max_len emitted events are discarded and
    retried, up to 100 * n_traces attempts.
    """
    if n_traces <= 0 or max_len <= 0:
        raise ValueError("n_traces and max_len must be positive")
    rng = random.Random(seed)
    initial = net.initial_marking()
    final = net.final_marking()
    firing_cap = max_len * 10 + 100

    sequences: list[list[str]] = []
    attempts = 0
    budget = 100 * n_traces
    while len(sequences) < n_traces:
        attempts += 1
        if attempts > budget:
            raise PlayoutError(
                f"net rarely terminates within max_len={max_len}: "
                f"{len(sequences)}/{n_traces} traces after {budget} attempts"
            )
        marking = dict(initial)
        emitted: list[str] = []
        firings = 0
        while True:
            if marking == final:
                sequences.append(emitted)
                break
            enabled = net.enabled(marking)
            if not enabled:
                break
            t = enabled[rng.randrange(len(enabled))]
            marking = net.fire(marking, t)
            firings += 1
            if t.label is not None:
                emitted.append(t.label)
                if len(emitted) > max_len:
                    break
            if firings > firing_cap:
                break
    return EventLog(
        name, tuple(Trace.of(str(i + 1), seq) for i, seq in enumerate(sequences))
    )


def language_as_log(language: BoundedLanguage, name: str = "variants") -> EventLog:
    """One trace per distinct variant, ids 1..n."""
    return EventLog(
        name, tuple(Trace.of(str(i + 1), seq) for i, seq in enumerate(language.traces))
    )


def can_replay(net: WorkflowNet, labels: tuple[str, ...], max_states: int = 200_000) -> bool:
    """Whether the net has a firing sequence emitting exactly these labels."""
    final = net.final_marking()
    start = (_freeze(net.initial_marking()), 0)
    seen = {start}
    frontier = [(net.initial_marking(), 0)]
    while frontier:
        marking, pos = frontier.pop()
        if pos == len(labels) and marking == final:
            return True
        for t in net.enabled(marking):
            if t.label is None:
                nxt_pos = pos
            elif pos < len(labels) and t.label == labels[pos]:
                nxt_pos = pos + 1
            else:
                continue
            nxt = net.fire(marking, t)
            state = (_freeze(nxt), nxt_pos)
            if state not in seen:
                if len(seen) >= max_states:
                    return False
                seen.add(state)
                frontier.append((nxt, nxt_pos))
    return False


# --- ground truth ---------------------------------------------------------------


def truth_from_language(
    language: BoundedLanguage,
    activity_labels: tuple[str, ...],
    allow_incomplete: bool = False,
) -> ConstraintSet:
    """Constraints that hold on every trace of an already-enumerated language."""
    if not language.complete:
        if not allow_incomplete:
            raise TruncatedLanguageError("language truncated; ground truth would be unsound")
        warnings.warn("language truncated; extracted ground truth is approximate")
    traces = language.traces
    kept = []
    for cand in candidate_constraints(activity_labels):
        if all(evaluate(cand, tr).satisfied for tr in traces) and any(
            is_activated(cand, tr) for tr in traces
        ):
            kept.append(cand)
    return ConstraintSet(kept)


def extract_truth(
    net: WorkflowNet,
    max_len: int = 50,
    max_variants: int = 5000,
    allow_incomplete: bool = False,
) -> ConstraintSet:
    """Constraints that hold on every trace of the bounded language.

    The candidate space covers the net's activity labels; candidates that are
    never activated on any trace are excluded, so the output never speaks
    about behavior the model cannot show.
    """
    language = playout_exhaustive(net, max_len=max_len, max_variants=max_variants)
    return truth_from_language(language, net.activity_labels(), allow_incomplete)
