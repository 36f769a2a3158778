"""Apply a constraint set to a log and report explainable violations.

Violations carry the constraint, the trace, and (for order templates) the
event index that demonstrates the breach, covering the trace, event, and
constraint reporting levels.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .constraints import Constraint, ConstraintSet, evaluate, render_constraint
from .logs import EventLog


@dataclass(frozen=True)
class Violation:
    constraint: Constraint
    trace_id: str
    witness: int | None = None


@dataclass
class ViolationReport:
    total_traces: int
    violations_by_constraint: dict[Constraint, list[Violation]] = field(default_factory=dict)
    violations_by_trace: dict[str, list[Violation]] = field(default_factory=dict)

    def frequency(self, c: Constraint) -> int:
        return len(self.violations_by_constraint.get(c, ()))

    def ranked(self) -> list[tuple[Constraint, int]]:
        """Constraints with their violating-trace counts, most frequent first."""
        rows = [(c, len(vs)) for c, vs in self.violations_by_constraint.items()]
        rows.sort(key=lambda item: (-item[1], render_constraint(item[0])))
        return rows

    def to_json(self) -> str:
        obj = {
            "total_traces": self.total_traces,
            "constraints": [
                {
                    "constraint": render_constraint(c),
                    "frequency": count,
                    "traces": [v.trace_id for v in self.violations_by_constraint[c]],
                }
                for c, count in self.ranked()
            ],
            "flagged_traces": sorted(self.violations_by_trace),
        }
        return json.dumps(obj, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["id,constraint,frequency"]
        for i, (c, count) in enumerate(self.ranked(), start=1):
            lines.append(f'a{i},"{render_constraint(c)}",{count}')
        return "".join(line + "\n" for line in lines)


def check(log: EventLog, constraints: ConstraintSet) -> ViolationReport:
    """Evaluate every constraint on every trace and aggregate violations.

    Traces are processed one at a time, so memory stays proportional to the
    constraint set and the report, not the whole log cross product.
    """
    if len(constraints) == 0:
        warnings.warn("empty constraint set; nothing to check")
    report = ViolationReport(total_traces=len(log.traces))
    ordered = list(constraints)
    for trace in log.traces:
        labels = trace.labels
        for constraint in ordered:
            result = evaluate(constraint, labels)
            if result.satisfied:
                continue
            violation = Violation(constraint, trace.id, result.witness)
            report.violations_by_constraint.setdefault(constraint, []).append(violation)
            report.violations_by_trace.setdefault(trace.id, []).append(violation)
    return report


def flag_traces(report: ViolationReport) -> frozenset[str]:
    """Trace-level view: ids with at least one violation."""
    return frozenset(report.violations_by_trace)
