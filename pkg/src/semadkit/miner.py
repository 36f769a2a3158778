"""Frequency-based discovery of DECLARE constraints from a log.

Plays the role of the classical declarative miners: every candidate over the
log alphabet is scored by support, confidence, and an interest factor, and
the survivors of the three thresholds are returned. Support counts vacuously
satisfied traces; confidence conditions on activation. The interest factor
is confidence damped by the rarest parameter's trace frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import (
    Constraint,
    ConstraintType,
    candidate_constraints,
    evaluate,
    is_activated,
    render_constraint,
)
from .logs import EventLog

MAX_ALPHABET = 500  # candidate space is quadratic in the alphabet


@dataclass(frozen=True)
class MinerConfig:
    min_support: float = 0.95
    min_confidence: float = 0.25
    min_interest: float = 0.125
    types: frozenset[ConstraintType] = field(default_factory=lambda: frozenset(ConstraintType))

    def __post_init__(self) -> None:
        for name in ("min_support", "min_confidence", "min_interest"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class MinedConstraint:
    constraint: Constraint
    support: float
    confidence: float
    interest: float


def mine(log: EventLog, cfg: MinerConfig = MinerConfig()) -> list[MinedConstraint]:
    """Score every candidate constraint on the log and apply the thresholds.

    support    = satisfied traces / all traces (vacuous counts as satisfied)
    confidence = satisfied-and-activated traces / activated traces
    interest   = confidence * min trace-frequency of the constraint's labels
    Candidates never activated in the log are dropped. Output is sorted by
    descending support, then constraint text.
    """
    n = len(log.traces)
    if n == 0:
        raise ValueError("cannot mine an empty log")
    alphabet = sorted(log.alphabet)
    if len(alphabet) > MAX_ALPHABET:
        raise ValueError(f"alphabet of {len(alphabet)} labels exceeds the cap of {MAX_ALPHABET}")

    trace_labels = [t.labels for t in log.traces]
    label_freq = {
        a: sum(1 for labels in trace_labels if a in labels) / n for a in alphabet
    }

    mined: list[MinedConstraint] = []
    for cand in candidate_constraints(alphabet):
        if cand.ctype not in cfg.types:
            continue
        sat = 0
        act = 0
        sat_and_act = 0
        for labels in trace_labels:
            ok = evaluate(cand, labels).satisfied
            activated = is_activated(cand, labels)
            sat += ok
            act += activated
            sat_and_act += ok and activated
        if act == 0:
            continue
        support = sat / n
        confidence = sat_and_act / act
        interest = confidence * min(label_freq[a] for a in cand.args)
        if (
            support >= cfg.min_support
            and confidence >= cfg.min_confidence
            and interest >= cfg.min_interest
        ):
            mined.append(MinedConstraint(cand, support, confidence, interest))

    mined.sort(key=lambda m: (-m.support, render_constraint(m.constraint)))
    return mined


def scores_csv(mined: list[MinedConstraint]) -> str:
    lines = ["constraint,support,confidence,interest"]
    for m in mined:
        lines.append(
            f'"{render_constraint(m.constraint)}",{m.support:.6f},{m.confidence:.6f},{m.interest:.6f}'
        )
    return "".join(line + "\n" for line in lines)
