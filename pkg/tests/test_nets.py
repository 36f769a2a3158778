import json

import pytest

from semadkit import (
    Constraint,
    ConstraintType,
    NetStructureError,
    PlayoutError,
    Soundness,
    TruncatedLanguageError,
    check_soundness,
    evaluate,
    extract_truth,
    parse_net,
    playout_exhaustive,
    playout_sample,
)
from semadkit.nets import BoundedLanguage, can_replay, truth_from_language
from semadkit.netgen import random_loopfree_net

from _naive import naive_satisfied
from conftest import LOAN

C = ConstraintType


def net_json(places, transitions, arcs, source, sink):
    return json.dumps(
        {
            "places": places,
            "transitions": [{"id": t, "label": l} for t, l in transitions],
            "arcs": arcs,
            "source": source,
            "sink": sink,
        }
    )


SEQ_AB = net_json(
    ["p0", "p1", "p2"],
    [("t1", "a"), ("t2", "b")],
    [["p0", "t1"], ["t1", "p1"], ["p1", "t2"], ["t2", "p2"]],
    "p0",
    "p2",
)

XOR_ABC = net_json(
    ["p0", "p1", "p2"],
    [("t1", "a"), ("t2", "b"), ("t3", "c")],
    [["p0", "t1"], ["t1", "p1"], ["p1", "t2"], ["p1", "t3"], ["t2", "p2"], ["t3", "p2"]],
    "p0",
    "p2",
)

# a b* c: b loops on the middle place until c exits
LOOP = net_json(
    ["p0", "p1", "p2"],
    [("t1", "a"), ("t2", "b"), ("t3", "c")],
    [["p0", "t1"], ["t1", "p1"], ["p1", "t2"], ["t2", "p1"], ["p1", "t3"], ["t3", "p2"]],
    "p0",
    "p2",
)


class TestParseNet:
    def test_linear_net(self):
        net = parse_net(SEQ_AB)
        assert len(net.places) == 3
        assert len(net.transitions) == 2
        assert net.activity_labels() == ("a", "b")

    def test_two_sink_places(self):
        doc = net_json(
            ["p0", "p1", "p2"],
            [("t1", "a")],
            [["p0", "t1"], ["t1", "p1"], ["t1", "p2"]],
            "p0",
            "p1",
        )
        with pytest.raises(NetStructureError, match="multiple sink places"):
            parse_net(doc)

    def test_silent_transition_accepted(self):
        doc = net_json(
            ["p0", "p1"], [("t1", None)], [["p0", "t1"], ["t1", "p1"]], "p0", "p1"
        )
        net = parse_net(doc)
        assert net.transitions[0].label is None

    def test_unnormalized_label_warns_and_normalizes(self):
        doc = net_json(
            ["p0", "p1"],
            [("t1", "Approve  It!")],
            [["p0", "t1"], ["t1", "p1"]],
            "p0",
            "p1",
        )
        with pytest.warns(UserWarning, match="auto-normalized"):
            net = parse_net(doc)
        assert net.activity_labels() == ("approve it",)

    def test_dangling_arc(self):
        doc = net_json(
            ["p0", "p1"], [("t1", "a")], [["p0", "t1"], ["t1", "nowhere"]], "p0", "p1"
        )
        with pytest.raises(NetStructureError, match="arc"):
            parse_net(doc)

    def test_disconnected_node(self):
        doc = net_json(
            ["p0", "p1", "px"],
            [("t1", "a")],
            [["p0", "t1"], ["t1", "p1"], ["px", "t1"]],
            "p0",
            "p1",
        )
        # px has no incoming arcs, so there are two source places
        with pytest.raises(NetStructureError, match="multiple source places"):
            parse_net(doc)

    def test_malformed_json(self):
        with pytest.raises(NetStructureError, match="invalid net JSON"):
            parse_net(b"{nope")

    def test_missing_key(self):
        with pytest.raises(NetStructureError, match="missing key"):
            parse_net(json.dumps({"places": [], "transitions": [], "arcs": []}))


class TestMarking:
    def test_from_counts_drops_zeros(self):
        from semadkit import Marking

        m = Marking.from_counts({"p0": 1, "p1": 0})
        assert m.tokens == (("p0", 1),)
        assert m.count("p0") == 1
        assert m.count("p1") == 0
        assert m.as_dict() == {"p0": 1}

    def test_negative_counts_rejected(self):
        from semadkit import Marking

        with pytest.raises(ValueError):
            Marking.from_counts({"p0": -1})

    def test_initial_and_final_markings(self, loan_net):
        from semadkit import Marking

        assert Marking.from_counts(loan_net.initial_marking()).tokens == (("p0", 1),)
        assert Marking.from_counts(loan_net.final_marking()).tokens == (("p7", 1),)


class TestSoundness:
    def test_linear_net_is_sound(self):
        assert check_soundness(parse_net(SEQ_AB)).status is Soundness.SOUND

    def test_loan_net_is_sound(self, loan_net):
        assert check_soundness(loan_net).status is Soundness.SOUND

    def test_improper_completion(self):
        # t1 puts a token on the sink and a stray token on p2
        doc = net_json(
            ["p0", "p1", "p2"],
            [("t1", "a"), ("t2", "b")],
            [["p0", "t1"], ["t1", "p1"], ["t1", "p2"], ["p2", "t2"], ["t2", "p1"]],
            "p0",
            "p1",
        )
        result = check_soundness(parse_net(doc))
        assert result.status is Soundness.UNSOUND
        assert "improper completion" in result.reason

    def test_dead_transition(self):
        # t2 needs tokens on p1 and p2 at once, which never happens
        doc = net_json(
            ["p0", "p1", "p2", "p3"],
            [("t1", "a"), ("t2", "b"), ("t3", "c")],
            [
                ["p0", "t1"], ["t1", "p1"],
                ["p1", "t3"], ["t3", "p2"],
                ["p1", "t2"], ["p2", "t2"], ["t2", "p3"],
                ["p2", "t4"],
            ],
            "p0",
            "p3",
        )
        doc = json.loads(doc)
        doc["transitions"].append({"id": "t4", "label": "d"})
        doc["arcs"].append(["t4", "p3"])
        result = check_soundness(parse_net(json.dumps(doc)))
        assert result.status is Soundness.UNSOUND
        assert "dead transition" in result.reason

    def test_loop_net_is_sound(self):
        assert check_soundness(parse_net(LOOP)).status is Soundness.SOUND

    def test_state_bound_yields_unknown(self):
        result = check_soundness(parse_net(LOOP), state_bound=1)
        assert result.status is Soundness.UNKNOWN


class TestPlayoutExhaustive:
    def test_sequence_net(self):
        lang = playout_exhaustive(parse_net(SEQ_AB))
        assert lang.traces == (("a", "b"),)
        assert lang.complete

    def test_xor_split(self):
        lang = playout_exhaustive(parse_net(XOR_ABC))
        assert set(lang.traces) == {("a", "b"), ("a", "c")}
        assert lang.complete

    def test_loan_language_contains_happy_path(self, loan_net):
        lang = playout_exhaustive(loan_net)
        happy = tuple(LOAN[x] for x in "ABCEGH")
        assert happy in lang.traces
        assert lang.complete
        assert len(lang.traces) == 2

    def test_loop_net_truncates(self):
        lang = playout_exhaustive(parse_net(LOOP), max_len=6)
        assert not lang.complete
        assert ("a", "c") in lang.traces
        assert ("a", "b", "c") in lang.traces
        assert all(len(t) <= 6 for t in lang.traces)

    def test_max_variants_truncates(self):
        lang = playout_exhaustive(parse_net(LOOP), max_len=30, max_variants=3)
        assert not lang.complete
        assert len(lang.traces) == 3

    def test_silent_transitions_emit_nothing(self):
        doc = net_json(
            ["p0", "p1", "p2"],
            [("t1", "a"), ("t2", None)],
            [["p0", "t1"], ["t1", "p1"], ["p1", "t2"], ["t2", "p2"]],
            "p0",
            "p2",
        )
        lang = playout_exhaustive(parse_net(doc))
        assert lang.traces == (("a",),)

    def test_silent_loop_is_pruned(self):
        doc = net_json(
            ["p0", "p1", "p2"],
            [("t1", "a"), ("t2", None), ("t3", "b")],
            [
                ["p0", "t1"], ["t1", "p1"],
                ["p1", "t2"], ["t2", "p1"],
                ["p1", "t3"], ["t3", "p2"],
            ],
            "p0",
            "p2",
        )
        lang = playout_exhaustive(parse_net(doc))
        assert lang.traces == (("a", "b"),)
        assert lang.complete

    def test_unreachable_final_warns(self):
        # t3 needs tokens on p1 and p2 at once; only one circulates, so the
        # final marking is never reached and every walk deadlocks
        doc = net_json(
            ["p0", "p1", "p2", "p3"],
            [("t1", "a"), ("t2", "b"), ("t3", "c")],
            [
                ["p0", "t1"], ["t1", "p1"],
                ["p1", "t2"], ["t2", "p2"],
                ["p1", "t3"], ["p2", "t3"], ["t3", "p3"],
            ],
            "p0",
            "p3",
        )
        with pytest.warns(UserWarning, match="empty"):
            lang = playout_exhaustive(parse_net(doc))
        assert lang.traces == ()

    def test_traces_are_replayable(self, loan_net):
        lang = playout_exhaustive(loan_net)
        for trace in lang.traces:
            assert can_replay(loan_net, trace)
        assert not can_replay(loan_net, ("archive case",))


class TestPlayoutSample:
    def test_deterministic_net_gives_identical_traces(self):
        log = playout_sample(parse_net(SEQ_AB), n_traces=5, seed=1)
        assert len(log) == 5
        assert all(t.labels == ("a", "b") for t in log.traces)

    def test_same_seed_same_log(self):
        net = parse_net(XOR_ABC)
        log1 = playout_sample(net, n_traces=50, seed=42)
        log2 = playout_sample(net, n_traces=50, seed=42)
        assert log1 == log2

    def test_both_variants_present(self):
        net = parse_net(XOR_ABC)
        log = playout_sample(net, n_traces=1000, seed=3)
        variants = set(t.labels for t in log.traces)
        assert variants == {("a", "b"), ("a", "c")}

    def test_retry_budget_exhausted(self):
        # max_len 1 can never fit the 2-event minimum of this net
        with pytest.raises(PlayoutError, match="rarely terminates"):
            playout_sample(parse_net(SEQ_AB), n_traces=3, max_len=1, seed=0)

    def test_sampled_traces_are_replayable(self):
        net = parse_net(LOOP)
        log = playout_sample(net, n_traces=30, max_len=20, seed=5)
        for t in log.traces:
            assert can_replay(net, t.labels)


class TestExtractTruth:
    def test_loan_contains_exclusive_choice(self, loan_truth):
        assert (
            Constraint(C.EXCLUSIVE_CHOICE, ("approve application", "reject application"))
            in loan_truth
        )

    def test_loan_contains_init_and_end(self, loan_truth):
        assert Constraint(C.INIT, ("receive loan application",)) in loan_truth
        assert Constraint(C.END, ("archive case",)) in loan_truth

    def test_sequence_net_truth(self):
        truth = extract_truth(parse_net(SEQ_AB))
        assert Constraint(C.SUCCESSION, ("a", "b")) in truth
        assert Constraint(C.EXCLUSIVE_CHOICE, ("a", "b")) not in truth

    def test_truth_is_consistent_with_language(self, loan_net, loan_truth):
        lang = playout_exhaustive(loan_net)
        for constraint in loan_truth:
            for trace in lang.traces:
                assert naive_satisfied(constraint, trace)

    def test_refuses_truncated_language(self):
        with pytest.raises(TruncatedLanguageError):
            extract_truth(parse_net(LOOP), max_len=6)

    def test_allow_incomplete_warns(self):
        with pytest.warns(UserWarning, match="approximate"):
            truth = extract_truth(parse_net(LOOP), max_len=6, allow_incomplete=True)
        assert len(truth) > 0

    def test_vacuous_candidates_are_excluded(self):
        # c never occurs in the language, so constraints activated only by c
        # must not be claimed
        language = BoundedLanguage(traces=(("a", "b"),), complete=True)
        truth = truth_from_language(language, ("a", "b", "c"))
        assert Constraint(C.RESPONSE, ("c", "a")) not in truth
        assert Constraint(C.PRECEDENCE, ("a", "c")) not in truth
        assert Constraint(C.RESPONSE, ("a", "b")) in truth


class TestNetgen:
    @pytest.mark.parametrize("seed", range(10))
    def test_generated_nets_are_sound_and_finite(self, seed):
        net = random_loopfree_net(n_activities=6, seed=seed)
        assert check_soundness(net).status is Soundness.SOUND
        lang = playout_exhaustive(net)
        assert lang.complete
        assert len(lang.traces) >= 1
        # every activity occurs somewhere in the language
        seen = set(l for t in lang.traces for l in t)
        assert seen == set(net.activity_labels())

    def test_net_json_round_trip(self):
        net = random_loopfree_net(n_activities=5, seed=3)
        assert parse_net(net.to_json()) == net

    def test_extracted_truth_holds_on_every_trace(self):
        net = random_loopfree_net(n_activities=5, seed=17)
        lang = playout_exhaustive(net)
        truth = truth_from_language(lang, net.activity_labels())
        for constraint in truth:
            for trace in lang.traces:
                assert evaluate(constraint, trace).satisfied
