import json

import pytest

from events2constraints import beam_search, generate_file
from events2constraints.train import load_checkpoint

from conftest import TOY_REPO, net_labels, queries_for


@pytest.fixture(scope="module")
def loaded(mini_checkpoint):
    model, vocab, cfg = load_checkpoint(mini_checkpoint)
    return model, vocab


def query_for_net(name, type_name="Init"):
    labels = net_labels(TOY_REPO / name)
    return f"{type_name}: {', '.join(labels)}"


class TestBeamContract:
    def test_one_beam_one_line(self, loaded):
        model, vocab = loaded
        out = beam_search(model, vocab, query_for_net("toy00.json"), beams=1, max_len=24)
        assert len(out) == 1

    def test_n_beams_n_lines(self, loaded):
        model, vocab = loaded
        out = beam_search(model, vocab, query_for_net("toy01.json"), beams=10, max_len=24)
        assert len(out) == 10

    def test_probs_non_increasing_and_bounded(self, loaded):
        model, vocab = loaded
        out = beam_search(model, vocab, query_for_net("toy02.json"), beams=8, max_len=24)
        probs = [c.prob for c in out]
        assert all(0.0 <= p <= 1.0 for p in probs)
        assert probs == sorted(probs, reverse=True)

    def test_type_field_echoes_query(self, loaded):
        model, vocab = loaded
        query = query_for_net("toy00.json", "Alternate response")
        out = beam_search(model, vocab, query, beams=3, max_len=24)
        assert all(c.type_name == "Alternate response" for c in out)

    def test_empty_query_rejected(self, loaded):
        model, vocab = loaded
        with pytest.raises(ValueError):
            beam_search(model, vocab, "   ", beams=2, max_len=8)


class TestGenerateFile:
    def test_jsonl_schema(self, loaded):
        model, vocab = loaded
        labels = net_labels(TOY_REPO / "toy00.json")
        text = generate_file(model, vocab, queries_for(labels), beams=3, max_len=24)
        lines = text.splitlines()
        assert len(lines) == 3 * 11
        for line in lines:
            obj = json.loads(line)
            assert set(obj) == {"type", "text", "prob"}
            assert 0.0 <= obj["prob"] <= 1.0

    def test_overfit_model_answers_its_training_queries(self, mini_corpus, loaded):
        # for each net, query its best-populated constraint type; the top
        # beams must contain that net's own targets for that type
        model, vocab = loaded
        slots = {}  # (label set, type) -> set of targets
        for line in mini_corpus["pairs"].read_text().splitlines():
            pair = json.loads(line)
            type_name, labels = pair["input"].split(": ", 1)
            key = (frozenset(labels.split(", ")), type_name)
            slots.setdefault(key, set()).add(pair["target"])
        by_net = {}
        for (labels, type_name), targets in slots.items():
            best = by_net.get(labels)
            if best is None or len(targets) > len(best[1]):
                by_net[labels] = (type_name, targets)
        assert len(by_net) == 4
        hits = 0
        for labels, (type_name, targets) in by_net.items():
            query = f"{type_name}: {', '.join(sorted(labels))}"
            out = beam_search(model, vocab, query, beams=10, max_len=24)
            hits += bool({c.text for c in out} & targets)
        assert hits >= 3
