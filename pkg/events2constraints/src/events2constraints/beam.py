"""Beam-search decoding with length-normalized sequence probabilities.

Each query yields n candidate lines {"type", "text", "prob"} in the
gateway's exchange format. The reported probability is
exp(logprob / generated_length), the per-token geometric mean, so long
constraints are not systematically suppressed; it always lands in [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import torch

from .data import BOS, EOS, Vocab, detokenize, query_type


@dataclass(frozen=True)
class Candidate:
    type_name: str
    text: str
    prob: float


@dataclass
class _Beam:
    tokens: list[int]  # starts with BOS; EOS terminates
    logprob: float
    done: bool

    def normalized(self) -> float:
        generated = max(1, len(self.tokens) - 1)
        return self.logprob / generated


def beam_search(
    model, vocab: Vocab, query: str, beams: int, max_len: int, device: str = "cpu"
) -> list[Candidate]:
    """Decode one query into `beams` scored candidates, best first."""
    if not query.strip():
        raise ValueError("empty query")
    bos, eos = vocab.stoi[BOS], vocab.stoi[EOS]
    src_ids = vocab.encode(query)
    if not src_ids:
        raise ValueError(f"query tokenizes to nothing: {query!r}")
    type_name = query_type(query)
    src = torch.tensor([src_ids], dtype=torch.long, device=device)

    active = [_Beam([bos], 0.0, False)]
    finished: list[_Beam] = []
    with torch.no_grad():
        for _ in range(max_len):
            if not active:
                break
            tgt = torch.full(
                (len(active), max(len(b.tokens) for b in active)),
                vocab.stoi["<pad>"],
                dtype=torch.long,
                device=device,
            )
            for i, beam in enumerate(active):
                tgt[i, : len(beam.tokens)] = torch.tensor(beam.tokens, device=device)
            logits = model(src.expand(len(active), -1), tgt)
            # proposals from every active beam; EOS proposals retire to the
            # finished pool, the rest refill the beam set
            proposals: list[_Beam] = []
            for i, beam in enumerate(active):
                step_logits = logits[i, len(beam.tokens) - 1]
                logprobs = torch.log_softmax(step_logits, dim=-1)
                k = min(beams, logprobs.size(0))
                top = torch.topk(logprobs, k)
                for logp, token in zip(top.values.tolist(), top.indices.tolist()):
                    proposals.append(
                        _Beam(beam.tokens + [token], beam.logprob + logp, token == eos)
                    )
            proposals.sort(key=lambda b: -b.logprob)
            refill: list[_Beam] = []
            for beam in proposals:
                if beam.done:
                    finished.append(beam)
                elif len(refill) < beams:
                    refill.append(beam)
            active = refill
        # length cutoff: force-close whatever is still open
        for beam in active:
            finished.append(_Beam(beam.tokens + [eos], beam.logprob, True))

    finished.sort(key=lambda b: -b.normalized())
    out = []
    for beam in finished[:beams]:
        tokens = vocab.decode(beam.tokens)
        out.append(
            Candidate(type_name, detokenize(tokens), math.exp(beam.normalized()))
        )
    return out


def candidates_jsonl(candidates: list[Candidate]) -> str:
    return "".join(
        json.dumps({"type": c.type_name, "text": c.text, "prob": c.prob}) + "\n"
        for c in candidates
    )


def generate_file(
    model, vocab: Vocab, queries: list[str], beams: int, max_len: int, device: str = "cpu"
) -> str:
    """Candidate JSONL for a list of queries, in query order."""
    chunks = []
    for query in queries:
        chunks.append(candidates_jsonl(beam_search(model, vocab, query, beams, max_len, device)))
    return "".join(chunks)
