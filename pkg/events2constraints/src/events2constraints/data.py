"""Training-pair IO, word-level vocabulary, and (de)tokenization.

Pairs arrive as JSONL lines {"input": "Type: label, label, ...",
"target": "Type(label, label)"}. Text is split into word and punctuation
tokens; the vocabulary is built from the training pairs and frozen into the
checkpoint so generation tokenizes identically.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)

_TOKEN = re.compile(r"[A-Za-z0-9-]+|[(),:]")

# the eleven query type names, as the gateway renders them
TYPE_NAMES = (
    "Init",
    "End",
    "Succession",
    "Alternate succession",
    "Choice",
    "Co-existence",
    "Exclusive choice",
    "Response",
    "Alternate response",
    "Precedence",
    "Alternate precedence",
)


class PairFormatError(ValueError):
    """A training-pair line is malformed."""


@dataclass(frozen=True)
class Pair:
    input: str
    target: str


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def detokenize(tokens: list[str]) -> str:
    """Inverse of tokenize for constraint-shaped output."""
    text = " ".join(tokens)
    text = text.replace(" ( ", "(").replace("( ", "(").replace(" (", "(")
    text = text.replace(" )", ")").replace(" ,", ",")
    return text


def load_pairs(text: str) -> list[Pair]:
    """Parse pair JSONL; any malformed line aborts with its line number."""
    pairs = []
    bad: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            bad.append(f"line {lineno}: not valid JSON")
            continue
        if not isinstance(obj, dict) or "input" not in obj or "target" not in obj:
            bad.append(f"line {lineno}: expected keys input/target")
            continue
        if ": " not in obj["input"]:
            bad.append(f"line {lineno}: input lacks the 'Type: labels' shape")
            continue
        pairs.append(Pair(str(obj["input"]), str(obj["target"])))
    if bad:
        raise PairFormatError("; ".join(bad))
    if not pairs:
        raise PairFormatError("no training pairs found")
    return pairs


class Vocab:
    def __init__(self, tokens: list[str]):
        self.itos = list(SPECIALS) + tokens
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}

    @classmethod
    def build(cls, pairs: list[Pair]) -> "Vocab":
        seen: set[str] = set()
        for pair in pairs:
            seen.update(tokenize(pair.input))
            seen.update(tokenize(pair.target))
        # query types may not all occur in the pairs; keep them encodable
        for name in TYPE_NAMES:
            seen.update(tokenize(name))
        return cls(sorted(seen))

    def __len__(self) -> int:
        return len(self.itos)

    def encode(self, text: str) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(tok, unk) for tok in tokenize(text)]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.itos[i] for i in ids if self.itos[i] not in SPECIALS]

    def to_json(self) -> str:
        return json.dumps({"tokens": self.itos[len(SPECIALS):]}) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Vocab":
        return cls(json.loads(text)["tokens"])


def query_type(query: str) -> str:
    """The type-name prefix of a query "Type: labels..."."""
    if ": " not in query:
        raise ValueError(f"query lacks the 'Type: labels' shape: {query!r}")
    return query.split(": ", 1)[0].strip()
