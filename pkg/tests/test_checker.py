import json

import pytest

from semadkit import (
    Constraint,
    ConstraintSet,
    ConstraintType,
    EventLog,
    check,
    flag_traces,
)
from semadkit.nets import language_as_log, playout_exhaustive

from conftest import LOAN

C = ConstraintType

INIT_LOAN = ConstraintSet([Constraint(C.INIT, ("receive loan application",))])


class TestCheck:
    def test_sigma3_violates_init(self):
        sigma3 = ["check credit history", "approve application", "send approval", "disburse funds"]
        log = EventLog.from_sequences("L", [sigma3], ids=["s3"])
        report = check(log, INIT_LOAN)
        assert report.frequency(Constraint(C.INIT, ("receive loan application",))) == 1
        assert flag_traces(report) == {"s3"}

    def test_conforming_log_has_zero_violations(self, loan_net, loan_truth):
        log = language_as_log(playout_exhaustive(loan_net))
        report = check(log, loan_truth)
        assert report.violations_by_constraint == {}
        assert flag_traces(report) == frozenset()

    def test_frequency_counts_violating_traces(self):
        # 114 of 1000 traces break Response(x, y), mirroring a frequency-table row
        bad = [["x", "z"]] * 114
        good = [["x", "y"]] * 886
        log = EventLog.from_sequences("L", bad + good)
        target = Constraint(C.RESPONSE, ("x", "y"))
        report = check(log, ConstraintSet([target]))
        assert report.frequency(target) == 114

    def test_both_motivating_traces_flagged(self, loan_truth):
        sigma1 = [LOAN[x] for x in "ACBEG"]
        sigma2 = [LOAN[x] for x in "ACDFH"]
        log = EventLog.from_sequences("L", [sigma1, sigma2], ids=["s1", "s2"])
        report = check(log, loan_truth)
        assert flag_traces(report) == {"s1", "s2"}
        # the exclusion between approval and rejection is among s2's violations
        exch = Constraint(C.EXCLUSIVE_CHOICE, ("approve application", "reject application"))
        assert any(v.trace_id == "s2" for v in report.violations_by_constraint[exch])

    def test_empty_constraint_set_warns(self):
        log = EventLog.from_sequences("L", [["a"]])
        with pytest.warns(UserWarning, match="empty constraint set"):
            report = check(log, ConstraintSet())
        assert report.violations_by_constraint == {}
        assert report.total_traces == 1

    def test_frequency_sum_at_least_flagged_count(self, loan_truth):
        sigma1 = [LOAN[x] for x in "ACBEG"]
        sigma2 = [LOAN[x] for x in "ACDFH"]
        log = EventLog.from_sequences("L", [sigma1, sigma2])
        report = check(log, loan_truth)
        total = sum(count for _, count in report.ranked())
        assert total >= len(flag_traces(report))

    def test_monotone_in_constraint_set(self):
        log = EventLog.from_sequences("L", [["b", "a"], ["a"]])
        small = ConstraintSet([Constraint(C.RESPONSE, ("a", "b"))])
        large = small | ConstraintSet([Constraint(C.END, ("b",))])
        small_report = check(log, small)
        large_report = check(log, large)
        for constraint, violations in small_report.violations_by_constraint.items():
            assert len(large_report.violations_by_constraint[constraint]) == len(violations)

    def test_witnesses_are_valid_positions(self):
        log = EventLog.from_sequences("L", [["a", "a", "b"], ["b", "a"]])
        cs = ConstraintSet(
            [
                Constraint(C.ALT_RESPONSE, ("a", "b")),
                Constraint(C.PRECEDENCE, ("a", "b")),
            ]
        )
        report = check(log, cs)
        for violations in report.violations_by_trace.values():
            for v in violations:
                trace = next(t for t in log.traces if t.id == v.trace_id)
                assert v.witness is None or 0 <= v.witness < len(trace)


class TestFlagTraces:
    def test_empty_report(self):
        log = EventLog.from_sequences("L", [["a"]])
        report = check(log, ConstraintSet([Constraint(C.INIT, ("a",))]))
        assert flag_traces(report) == frozenset()

    def test_single_violation(self):
        log = EventLog.from_sequences("L", [["b"]], ids=["t1"])
        report = check(log, ConstraintSet([Constraint(C.INIT, ("a",))]))
        assert flag_traces(report) == {"t1"}


class TestReportFormats:
    def test_json_shape(self):
        log = EventLog.from_sequences("L", [["b", "a"], ["a", "b"]], ids=["t1", "t2"])
        report = check(log, ConstraintSet([Constraint(C.INIT, ("a",))]))
        obj = json.loads(report.to_json())
        assert obj["total_traces"] == 2
        assert obj["flagged_traces"] == ["t1"]
        assert obj["constraints"] == [
            {"constraint": "Init(a)", "frequency": 1, "traces": ["t1"]}
        ]

    def test_csv_ranked_by_frequency(self):
        log = EventLog.from_sequences("L", [["b"], ["b"], ["c", "a"]])
        cs = ConstraintSet([Constraint(C.INIT, ("a",)), Constraint(C.END, ("a",))])
        report = check(log, cs)
        lines = report.to_csv().splitlines()
        assert lines[0] == "id,constraint,frequency"
        # Init(a) violated by all three traces, End(a) by two
        assert lines[1] == 'a1,"Init(a)",3'
        assert lines[2] == 'a2,"End(a)",2'
