"""Exchange boundary with the constraint generator.

The generator itself (a seq2seq model) lives outside this package; this
module builds its inputs, exports training pairs, ingests its scored
candidates from JSONL, and applies the vocabulary and probability filters
that turn raw candidates into a constraint set.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .constraints import (
    Constraint,
    ConstraintSet,
    ConstraintSyntaxError,
    ConstraintType,
    lookup_type,
    parse_constraint,
    render_constraint,
)
from .nets import WorkflowNet


@dataclass(frozen=True)
class CandidateConstraint:
    """One scored generator output for a typed query."""

    raw_text: str
    probability: float
    ctype_queried: ConstraintType

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")


@dataclass(frozen=True)
class FilterConfig:
    theta: float = 0.7

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be in [0, 1]")


@dataclass(frozen=True)
class TrainingPair:
    input: str
    target: str


def _format_input(ctype: ConstraintType, shuffled: Sequence[str]) -> str:
    return f"{ctype.long_name}: {', '.join(shuffled)}"


def build_input(ctype: ConstraintType, labels: Iterable[str], seed: int) -> str:
    """Query string "TypeName: l1, l2, ..." with a seed-determined shuffle."""
    ordered = sorted(set(labels))
    if not ordered:
        raise ValueError("label set is empty")
    rng = random.Random(seed)
    rng.shuffle(ordered)
    return _format_input(ctype, ordered)


def export_training_pairs(
    repo: Sequence[tuple[WorkflowNet, ConstraintSet]], seed: int = 0
) -> list[TrainingPair]:
    """One pair per (net, constraint), each with a fresh shuffle of the
    net's activity labels. Nets with an empty constraint set contribute
    nothing."""
    rng = random.Random(seed)
    pairs: list[TrainingPair] = []
    for index, (net, constraints) in enumerate(repo):
        if len(constraints) == 0:
            warnings.warn(f"net #{index} has an empty constraint set; skipped")
            continue
        activity_labels = list(net.activity_labels())
        for constraint in constraints:
            shuffled = list(activity_labels)
            rng.shuffle(shuffled)
            pairs.append(
                TrainingPair(
                    input=_format_input(constraint.ctype, shuffled),
                    target=render_constraint(constraint),
                )
            )
    return pairs


def write_training_pairs(pairs: Sequence[TrainingPair]) -> str:
    return "".join(
        json.dumps({"input": p.input, "target": p.target}) + "\n" for p in pairs
    )


@dataclass(frozen=True)
class LineError:
    line: int
    reason: str


def ingest_candidates(stream: str) -> tuple[list[CandidateConstraint], list[LineError]]:
    """Parse candidate JSONL lines {"type":, "text":, "prob":}.

    Malformed lines are collected as errors; valid lines are kept.
    """
    candidates: list[CandidateConstraint] = []
    errors: list[LineError] = []
    for lineno, line in enumerate(stream.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(LineError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict) or not {"type", "text", "prob"} <= set(obj):
            errors.append(LineError(lineno, "expected object with type/text/prob"))
            continue
        try:
            ctype = lookup_type(str(obj["type"]))
        except ConstraintSyntaxError as exc:
            errors.append(LineError(lineno, str(exc)))
            continue
        prob = obj["prob"]
        if not isinstance(prob, (int, float)) or isinstance(prob, bool) or not 0.0 <= prob <= 1.0:
            errors.append(LineError(lineno, f"prob outside [0, 1]: {prob!r}"))
            continue
        candidates.append(CandidateConstraint(str(obj["text"]), float(prob), ctype))
    return candidates, errors


REJECT_REASONS = ("vocab", "parse", "threshold", "type_mismatch")


@dataclass(frozen=True)
class FilterResult:
    constraints: ConstraintSet
    rejects: dict[str, int]
    # highest surviving probability per accepted constraint
    probabilities: dict[Constraint, float]

    def rejects_json(self) -> str:
        return json.dumps({k: self.rejects[k] for k in REJECT_REASONS}) + "\n"


def filter_candidates(
    candidates: Iterable[CandidateConstraint],
    vocab: frozenset[str] | set[str],
    cfg: FilterConfig,
) -> FilterResult:
    """Keep candidates that parse, match their queried type, stay inside the
    log vocabulary, and score strictly above theta.

    A candidate failing several checks is tallied once, under the first
    failing check in the order parse, type_mismatch, vocab, threshold.
    Duplicates collapse to one constraint, keeping the highest probability.
    """
    rejects = {reason: 0 for reason in REJECT_REASONS}
    best: dict[Constraint, float] = {}
    for cand in candidates:
        try:
            parsed = parse_constraint(cand.raw_text)
        except ConstraintSyntaxError:
            rejects["parse"] += 1
            continue
        if parsed.ctype is not cand.ctype_queried:
            rejects["type_mismatch"] += 1
            continue
        if not all(arg in vocab for arg in parsed.args):
            rejects["vocab"] += 1
            continue
        if not cand.probability > cfg.theta:
            rejects["threshold"] += 1
            continue
        if cand.probability > best.get(parsed, -1.0):
            best[parsed] = cand.probability
    return FilterResult(ConstraintSet(best), rejects, best)
