"""Random loop-free workflow nets, built from process trees.

Trees compose sequence, exclusive-choice, and parallel blocks over distinct
activity labels, so the resulting nets are sound by construction and their
trace languages are finite. Parallel blocks are kept small (no nesting,
at most four leaves) so exhaustive playout stays cheap.
"""

from __future__ import annotations

import random
from typing import Sequence

from .nets import Transition, WorkflowNet

LETTERS = tuple("abcdefghijklmnopqrstuvwxyz")

WORD_LABELS = (
    "receive request",
    "check documents",
    "assess risk",
    "approve request",
    "reject request",
    "notify customer",
    "schedule review",
    "archive file",
    "update record",
    "issue invoice",
    "collect payment",
    "close case",
    "escalate issue",
    "assign agent",
    "verify identity",
    "prepare report",
    "ship goods",
    "confirm delivery",
    "handle complaint",
    "refund payment",
)


class _Builder:
    def __init__(self) -> None:
        self.places: list[str] = []
        self.transitions: list[Transition] = []
        self.arcs: list[tuple[str, str]] = []

    def new_place(self) -> str:
        pid = f"p{len(self.places)}"
        self.places.append(pid)
        return pid

    def new_transition(self, label: str | None) -> str:
        tid = f"t{len(self.transitions)}"
        self.transitions.append(Transition(tid, label))
        return tid

    def arc(self, src: str, dst: str) -> None:
        self.arcs.append((src, dst))


def _random_tree(labels: list[str], rng: random.Random, in_parallel: bool) -> tuple:
    if len(labels) == 1:
        return ("leaf", labels[0])
    ops = ["seq", "xor"]
    weights = [5, 3]
    if not in_parallel and len(labels) <= 4:
        ops.append("and")
        weights.append(2)
    op = rng.choices(ops, weights=weights, k=1)[0]
    k = rng.randint(2, min(3, len(labels)))
    cuts = sorted(rng.sample(range(1, len(labels)), k - 1))
    groups = []
    start = 0
    for cut in cuts + [len(labels)]:
        groups.append(labels[start:cut])
        start = cut
    children = tuple(
        _random_tree(g, rng, in_parallel or op == "and") for g in groups
    )
    return (op, children)


def _emit(tree: tuple, p_in: str, p_out: str, b: _Builder) -> None:
    kind = tree[0]
    if kind == "leaf":
        t = b.new_transition(tree[1])
        b.arc(p_in, t)
        b.arc(t, p_out)
    elif kind == "seq":
        children = tree[1]
        prev = p_in
        for child in children[:-1]:
            nxt = b.new_place()
            _emit(child, prev, nxt, b)
            prev = nxt
        _emit(children[-1], prev, p_out, b)
    elif kind == "xor":
        for child in tree[1]:
            _emit(child, p_in, p_out, b)
    elif kind == "and":
        split = b.new_transition(None)
        join = b.new_transition(None)
        b.arc(p_in, split)
        b.arc(join, p_out)
        for child in tree[1]:
            entry = b.new_place()
            exit_ = b.new_place()
            b.arc(split, entry)
            b.arc(exit_, join)
            _emit(child, entry, exit_, b)
    else:  # pragma: no cover
        raise AssertionError(kind)


def random_loopfree_net(
    n_activities: int, seed: int, labels: Sequence[str] | None = None
) -> WorkflowNet:
    """A random sound loop-free workflow net over n distinct activities."""
    if n_activities < 1:
        raise ValueError("need at least one activity")
    pool = tuple(labels) if labels is not None else LETTERS
    if n_activities > len(pool):
        raise ValueError(f"label pool has only {len(pool)} entries")
    rng = random.Random(seed)
    chosen = rng.sample(list(pool), n_activities)
    tree = _random_tree(chosen, rng, in_parallel=False)

    b = _Builder()
    source = b.new_place()
    sink = b.new_place()
    _emit(tree, source, sink, b)
    return WorkflowNet(
        places=frozenset(b.places),
        transitions=tuple(b.transitions),
        arcs=frozenset(b.arcs),
        source=source,
        sink=sink,
    )
