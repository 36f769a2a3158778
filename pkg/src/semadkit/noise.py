"""Log expansion and control-flow noise injection.

Reproduces the common experimental setup: resample a clean log to a target
size, then corrupt a fixed fraction of traces by inserting, deleting, or
swapping events. Every applied operation is recorded so tests and evaluations
know exactly which traces were perturbed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from enum import Enum

from .logs import EventLog, Trace


class NoiseKind(Enum):
    INSERT = "insert"
    DELETE = "delete"
    SWAP = "swap"


@dataclass(frozen=True)
class NoiseConfig:
    target_traces: int = 1000
    noisy_fraction: float = 0.3
    ops_per_noisy_trace: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.noisy_fraction <= 1.0:
            raise ValueError("noisy_fraction must be in [0, 1]")
        if self.target_traces <= 0 or self.ops_per_noisy_trace <= 0:
            raise ValueError("counts must be positive")


@dataclass(frozen=True)
class NoiseOp:
    kind: NoiseKind
    position: int
    label: str | None = None  # inserted label, for inserts only


@dataclass(frozen=True)
class NoiseRecord:
    trace_id: str
    ops: tuple[NoiseOp, ...]


def expand_and_corrupt(
    clean: EventLog, cfg: NoiseConfig
) -> tuple[EventLog, list[NoiseRecord]]:
    """Resample clean variants to target size and corrupt a random subset.

    Traces are drawn uniformly with replacement from the distinct variants of
    the clean log. floor(noisy_fraction * target_traces) traces then each
    receive ops_per_noisy_trace operations, every operation drawn uniformly
    from insert / delete / swap. Delete is skipped on traces of length <= 1
    and swap on length < 2; skipped operations are not recorded. Fully
    deterministic under the seed.
    """
    if len(clean.traces) == 0:
        raise ValueError("clean log is empty")
    variants = clean.variants()
    alphabet = sorted(clean.alphabet)
    if not alphabet:
        raise ValueError("clean log has an empty alphabet")
    rng = random.Random(cfg.seed)

    sequences = [list(variants[rng.randrange(len(variants))]) for _ in range(cfg.target_traces)]
    n_noisy = math.floor(cfg.noisy_fraction * cfg.target_traces)
    noisy_indices = sorted(rng.sample(range(cfg.target_traces), n_noisy))

    records: list[NoiseRecord] = []
    for idx in noisy_indices:
        seq = sequences[idx]
        applied: list[NoiseOp] = []
        for _ in range(cfg.ops_per_noisy_trace):
            kind = (NoiseKind.INSERT, NoiseKind.DELETE, NoiseKind.SWAP)[rng.randrange(3)]
            if kind is NoiseKind.INSERT:
                label = alphabet[rng.randrange(len(alphabet))]
                pos = rng.randrange(len(seq) + 1)
                seq.insert(pos, label)
                applied.append(NoiseOp(NoiseKind.INSERT, pos, label))
            elif kind is NoiseKind.DELETE:
                if len(seq) <= 1:
                    continue
                pos = rng.randrange(len(seq))
                del seq[pos]
                applied.append(NoiseOp(NoiseKind.DELETE, pos))
            else:
                if len(seq) < 2:
                    continue
                pos = rng.randrange(len(seq) - 1)
                seq[pos], seq[pos + 1] = seq[pos + 1], seq[pos]
                applied.append(NoiseOp(NoiseKind.SWAP, pos))
        if applied:
            records.append(NoiseRecord(str(idx + 1), tuple(applied)))

    noisy_log = EventLog(
        f"{clean.name}-noisy",
        tuple(Trace.of(str(i + 1), seq) for i, seq in enumerate(sequences)),
    )
    return noisy_log, records


def write_noise_records(records: list[NoiseRecord]) -> str:
    """JSONL sidecar format, one record per perturbed trace."""
    lines = []
    for rec in records:
        lines.append(
            json.dumps(
                {
                    "trace_id": rec.trace_id,
                    "ops": [
                        {"kind": op.kind.value, "position": op.position, "label": op.label}
                        for op in rec.ops
                    ],
                }
            )
        )
    return "".join(line + "\n" for line in lines)


def read_noise_records(text: str) -> list[NoiseRecord]:
    records = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        ops = tuple(
            NoiseOp(NoiseKind(o["kind"]), o["position"], o.get("label")) for o in obj["ops"]
        )
        records.append(NoiseRecord(obj["trace_id"], ops))
    return records
