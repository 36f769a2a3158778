"""The eleven DECLARE constraint templates with finite-trace semantics.

Evaluation follows the standard interpretation with vacuous satisfaction: a
constraint whose activation never fires in a trace is satisfied there.
Co-existence deliberately uses the "a occurs iff b occurs" reading; flip
_coexistence_holds if the weaker conjunctive reading is ever needed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

from .logs import Trace, normalize_label, LabelError


class ConstraintSyntaxError(ValueError):
    """Unparseable or ill-formed constraint text."""


class ConstraintType(Enum):
    """Template catalogue. Init and End are unary, all others binary."""

    INIT = ("Init", "Init")
    END = ("End", "End")
    SUCCESSION = ("Succession", "Succ")
    ALT_SUCCESSION = ("Alternate succession", "AltSucc")
    CHOICE = ("Choice", "Ch")
    CO_EXISTENCE = ("Co-existence", "CoEx")
    EXCLUSIVE_CHOICE = ("Exclusive choice", "ExCh")
    RESPONSE = ("Response", "Resp")
    ALT_RESPONSE = ("Alternate response", "AltResp")
    PRECEDENCE = ("Precedence", "Prec")
    ALT_PRECEDENCE = ("Alternate precedence", "AltPrec")

    def __init__(self, long_name: str, short_name: str):
        self.long_name = long_name
        self.short_name = short_name

    @property
    def arity(self) -> int:
        return 1 if self in (ConstraintType.INIT, ConstraintType.END) else 2

    @property
    def symmetric(self) -> bool:
        """Argument order carries no meaning for these templates."""
        return self in (
            ConstraintType.CHOICE,
            ConstraintType.CO_EXISTENCE,
            ConstraintType.EXCLUSIVE_CHOICE,
        )


def _name_key(name: str) -> str:
    return re.sub(r"[\s_-]+", "", name).lower()


_TYPE_BY_KEY: dict[str, ConstraintType] = {}
for _ct in ConstraintType:
    for _alias in (_ct.long_name, _ct.short_name, _ct.name):
        _TYPE_BY_KEY[_name_key(_alias)] = _ct


def lookup_type(name: str) -> ConstraintType:
    """Resolve a type name, accepting long and short forms case-insensitively."""
    key = _name_key(name)
    if key not in _TYPE_BY_KEY:
        raise ConstraintSyntaxError(f"unknown constraint type: {name!r}")
    return _TYPE_BY_KEY[key]


@dataclass(frozen=True)
class Constraint:
    """A DECLARE template instance over one or two activity labels.

    Symmetric templates store their arguments in lexicographic order so that
    equal constraints compare equal.
    """

    ctype: ConstraintType
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.args) != self.ctype.arity:
            raise ConstraintSyntaxError(
                f"{self.ctype.long_name} takes {self.ctype.arity} argument(s), got {len(self.args)}"
            )
        for arg in self.args:
            if not arg:
                raise ConstraintSyntaxError("empty constraint argument")
            try:
                normalized = normalize_label(arg)
            except LabelError:
                raise ConstraintSyntaxError(f"argument {arg!r} is empty after cleaning") from None
            if normalized != arg:
                raise ConstraintSyntaxError(f"argument {arg!r} is not a normalized label")
        if len(self.args) == 2:
            if self.args[0] == self.args[1]:
                raise ConstraintSyntaxError(
                    f"identical arguments in {self.ctype.long_name}: {self.args[0]!r}"
                )
            if self.ctype.symmetric and self.args[0] > self.args[1]:
                object.__setattr__(self, "args", (self.args[1], self.args[0]))

    def __str__(self) -> str:
        return render_constraint(self)


def make(ctype: ConstraintType, *args: str) -> Constraint:
    return Constraint(ctype, tuple(args))


def parse_constraint(text: str) -> Constraint:
    """Parse "TypeName(arg)" or "TypeName(arg1, arg2)".

    Type names match the long or short form case-insensitively; arguments are
    normalized before validation so parse(render(c)) == c.
    """
    m = re.fullmatch(r"\s*([^()]+?)\s*\((.*)\)\s*", text, flags=re.DOTALL)
    if m is None:
        raise ConstraintSyntaxError(f"not of the form Type(args): {text!r}")
    ctype = lookup_type(m.group(1))
    raw_args = m.group(2).split(",")
    args = []
    for raw in raw_args:
        try:
            args.append(normalize_label(raw))
        except LabelError:
            raise ConstraintSyntaxError(f"empty argument in {text!r}") from None
    return Constraint(ctype, tuple(args))


def render_constraint(c: Constraint) -> str:
    """Long-form text, e.g. "Exclusive choice(a, b)"."""
    return f"{c.ctype.long_name}({', '.join(c.args)})"


class ConstraintSet:
    """A deduplicated set of constraints (canonical forms compare equal)."""

    __slots__ = ("_items",)

    def __init__(self, constraints: Iterable[Constraint] = ()):
        self._items: frozenset[Constraint] = frozenset(constraints)

    def __contains__(self, c: Constraint) -> bool:
        return c in self._items

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(sorted(self._items, key=render_constraint))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstraintSet) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __or__(self, other: "ConstraintSet") -> "ConstraintSet":
        return ConstraintSet(self._items | other._items)

    def __repr__(self) -> str:
        return f"ConstraintSet({len(self._items)} constraints)"

    def as_frozenset(self) -> frozenset[Constraint]:
        return self._items

    def restrict(self, ctype: ConstraintType) -> "ConstraintSet":
        return ConstraintSet(c for c in self._items if c.ctype is ctype)

    def to_json(self) -> str:
        return json.dumps({"constraints": [render_constraint(c) for c in self]}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ConstraintSet":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "constraints" not in obj:
            raise ConstraintSyntaxError("expected object with a 'constraints' list")
        return cls(parse_constraint(s) for s in obj["constraints"])


@dataclass(frozen=True)
class EvfRelation:
    """Eventually-follows: source occurs (directly or not) before target."""

    source: str
    target: str

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"eventually-follows endpoints must differ: {self.source!r}")


_EVF_ORDERED = (
    ConstraintType.RESPONSE,
    ConstraintType.ALT_RESPONSE,
    ConstraintType.SUCCESSION,
    ConstraintType.ALT_SUCCESSION,
    ConstraintType.PRECEDENCE,
    ConstraintType.ALT_PRECEDENCE,
)


def to_evf(c: Constraint) -> frozenset[EvfRelation]:
    """Project a constraint onto eventually-follows relations.

    Order templates map to one relation, co-existence to both directions,
    and the occurrence-only templates (Init, End, Choice, Exclusive choice)
    to nothing.
    """
    if c.ctype in _EVF_ORDERED:
        return frozenset({EvfRelation(c.args[0], c.args[1])})
    if c.ctype is ConstraintType.CO_EXISTENCE:
        a, b = c.args
        return frozenset({EvfRelation(a, b), EvfRelation(b, a)})
    return frozenset()


# --- evaluation --------------------------------------------------------------


class Verdict(Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"


@dataclass(frozen=True)
class Evaluation:
    verdict: Verdict
    witness: int | None = None

    @property
    def satisfied(self) -> bool:
        return self.verdict is Verdict.SATISFIED


_SAT = Evaluation(Verdict.SATISFIED)

TraceLike = Union[Trace, Sequence[str]]


def _labels_of(t: TraceLike) -> tuple[str, ...]:
    if isinstance(t, Trace):
        return t.labels
    return tuple(t)


def _coexistence_holds(has_a: bool, has_b: bool) -> bool:
    # the "iff" reading; see module docstring
    return has_a == has_b


def _response_witness(labels: Sequence[str], a: str, b: str) -> int | None:
    """First a after the last b, None when every a is answered."""
    last_b = -1
    for i, l in enumerate(labels):
        if l == b:
            last_b = i
    for i in range(last_b + 1, len(labels)):
        if labels[i] == a:
            return i
    return None


def _precedence_witness(labels: Sequence[str], a: str, b: str) -> int | None:
    """First b with no a anywhere before it."""
    for i, l in enumerate(labels):
        if l == a:
            return None
        if l == b:
            return i
    return None


def _alt_response_witness(labels: Sequence[str], a: str, b: str) -> int | None:
    """Smallest index demonstrating a broken alternation.

    An activation with no b after it is demonstrated at the activation
    itself; an activation answered only after a recurs is demonstrated at
    the recurrence.
    """
    pos_a = [i for i, l in enumerate(labels) if l == a]
    pos_b = [i for i, l in enumerate(labels) if l == b]
    best: int | None = None
    bi = 0
    for k, i in enumerate(pos_a):
        while bi < len(pos_b) and pos_b[bi] <= i:
            bi += 1
        if bi == len(pos_b):
            candidate = i
        else:
            nxt = pos_a[k + 1] if k + 1 < len(pos_a) else None
            if nxt is not None and nxt < pos_b[bi]:
                candidate = nxt
            else:
                continue
        if best is None or candidate < best:
            best = candidate
    return best


def _alt_precedence_witness(labels: Sequence[str], a: str, b: str) -> int | None:
    """First b whose nearest preceding a-or-b event is not an a."""
    last_ab: str | None = None
    for i, l in enumerate(labels):
        if l == b:
            if last_ab != a:
                return i
            last_ab = b
        elif l == a:
            last_ab = a
    return None


def _min_opt(x: int | None, y: int | None) -> int | None:
    if x is None:
        return y
    if y is None:
        return x
    return min(x, y)


def evaluate(c: Constraint, t: TraceLike) -> Evaluation:
    """Evaluate a constraint on a trace.

    Returns the verdict and, for violated order templates, the smallest event
    index demonstrating the violation. Occurrence templates (Init, End,
    Choice, Exclusive choice, Co-existence) carry no witness: no single event
    demonstrates their violation.
    """
    labels = _labels_of(t)
    ct = c.ctype
    if ct is ConstraintType.INIT:
        ok = len(labels) >= 1 and labels[0] == c.args[0]
        return _SAT if ok else Evaluation(Verdict.VIOLATED)
    if ct is ConstraintType.END:
        ok = len(labels) >= 1 and labels[-1] == c.args[0]
        return _SAT if ok else Evaluation(Verdict.VIOLATED)

    a, b = c.args
    if ct is ConstraintType.CHOICE:
        ok = a in labels or b in labels
        return _SAT if ok else Evaluation(Verdict.VIOLATED)
    if ct is ConstraintType.EXCLUSIVE_CHOICE:
        has_a, has_b = a in labels, b in labels
        ok = (has_a or has_b) and not (has_a and has_b)
        return _SAT if ok else Evaluation(Verdict.VIOLATED)
    if ct is ConstraintType.CO_EXISTENCE:
        ok = _coexistence_holds(a in labels, b in labels)
        return _SAT if ok else Evaluation(Verdict.VIOLATED)

    if ct is ConstraintType.RESPONSE:
        w = _response_witness(labels, a, b)
    elif ct is ConstraintType.PRECEDENCE:
        w = _precedence_witness(labels, a, b)
    elif ct is ConstraintType.ALT_RESPONSE:
        w = _alt_response_witness(labels, a, b)
    elif ct is ConstraintType.ALT_PRECEDENCE:
        w = _alt_precedence_witness(labels, a, b)
    elif ct is ConstraintType.SUCCESSION:
        w = _min_opt(_response_witness(labels, a, b), _precedence_witness(labels, a, b))
    elif ct is ConstraintType.ALT_SUCCESSION:
        w = _min_opt(_alt_response_witness(labels, a, b), _alt_precedence_witness(labels, a, b))
    else:  # pragma: no cover - exhaustive over ConstraintType
        raise AssertionError(ct)
    return _SAT if w is None else Evaluation(Verdict.VIOLATED, witness=w)


def is_satisfied(c: Constraint, t: TraceLike) -> bool:
    return evaluate(c, t).satisfied


def is_activated(c: Constraint, t: TraceLike) -> bool:
    """Whether the trace obliges the constraint to hold non-vacuously.

    Occurrence templates are always activated; Response-like templates by
    their first argument, Precedence-like by their second, and the
    succession/co-existence families by either.
    """
    labels = _labels_of(t)
    ct = c.ctype
    if ct in (ConstraintType.RESPONSE, ConstraintType.ALT_RESPONSE):
        return c.args[0] in labels
    if ct in (ConstraintType.PRECEDENCE, ConstraintType.ALT_PRECEDENCE):
        return c.args[1] in labels
    if ct in (
        ConstraintType.SUCCESSION,
        ConstraintType.ALT_SUCCESSION,
        ConstraintType.CO_EXISTENCE,
    ):
        return c.args[0] in labels or c.args[1] in labels
    return True


def candidate_constraints(labels: Iterable[str]) -> Iterator[Constraint]:
    """Enumerate the full candidate space over an activity alphabet.

    All unary templates per label; non-symmetric binary templates over every
    ordered pair of distinct labels; symmetric templates once per unordered
    pair. Deterministic order.
    """
    alphabet = sorted(set(labels))
    for a in alphabet:
        yield Constraint(ConstraintType.INIT, (a,))
        yield Constraint(ConstraintType.END, (a,))
    for ct in ConstraintType:
        if ct.arity != 2:
            continue
        if ct.symmetric:
            for i, a in enumerate(alphabet):
                for b in alphabet[i + 1 :]:
                    yield Constraint(ct, (a, b))
        else:
            for a in alphabet:
                for b in alphabet:
                    if a != b:
                        yield Constraint(ct, (a, b))
