"""Set-based evaluation of generated constraints against ground truth.

Scenarios: exact comparison over whole sets ("all"), restriction to a single
constraint type, or projection of both sides onto eventually-follows
relations ("evf"). Zero-denominator metrics are defined as 0, which keeps
threshold sweeps monotone.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence, TypeVar, Union

from .constraints import ConstraintSet, ConstraintType, to_evf
from .gateway import CandidateConstraint, FilterConfig, filter_candidates

Scenario = Union[ConstraintType, str]  # a type, "evf", or "all"

T = TypeVar("T")


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        return cls(tp, fp, fn, precision, recall, f1)


@dataclass(frozen=True)
class MacroAverage:
    """Arithmetic mean of per-log precision/recall/F1."""

    precision: float
    recall: float
    f1: float


def _validate_scenario(scenario: Scenario) -> None:
    if isinstance(scenario, ConstraintType):
        return
    if scenario in ("evf", "all"):
        return
    raise ValueError(f"unknown scenario: {scenario!r}")


def _project(cs: ConstraintSet, scenario: Scenario) -> frozenset:
    if isinstance(scenario, ConstraintType):
        return cs.restrict(scenario).as_frozenset()
    if scenario == "evf":
        out = set()
        for c in cs:
            out |= to_evf(c)
        return frozenset(out)
    return cs.as_frozenset()


def score(pred: ConstraintSet, truth: ConstraintSet, scenario: Scenario = "all") -> Metrics:
    """Exact set comparison after scenario projection.

    tp = |pred ∩ truth|, fp = |pred \\ truth|, fn = |truth \\ pred|.
    """
    _validate_scenario(scenario)
    p = _project(pred, scenario)
    t = _project(truth, scenario)
    return Metrics.from_counts(tp=len(p & t), fp=len(p - t), fn=len(t - p))


@dataclass(frozen=True)
class EvalReport:
    scenario: Scenario
    per_log: tuple[Metrics, ...]
    macro: MacroAverage
    micro: Metrics


def evaluate_corpus(
    runs: Sequence[tuple[ConstraintSet, ConstraintSet]], scenario: Scenario = "all"
) -> EvalReport:
    """Score each (pred, truth) run and aggregate.

    The macro average (mean of per-log scores) is the headline number; the
    micro average (pooled counts) is also reported.
    """
    if not runs:
        raise ValueError("no runs to evaluate")
    per_log = tuple(score(pred, truth, scenario) for pred, truth in runs)
    macro = MacroAverage(
        precision=sum(m.precision for m in per_log) / len(per_log),
        recall=sum(m.recall for m in per_log) / len(per_log),
        f1=sum(m.f1 for m in per_log) / len(per_log),
    )
    micro = Metrics.from_counts(
        tp=sum(m.tp for m in per_log),
        fp=sum(m.fp for m in per_log),
        fn=sum(m.fn for m in per_log),
    )
    return EvalReport(scenario, per_log, macro, micro)


# --- theta sweep ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepRun:
    """One log's worth of sweep input: its candidates, vocabulary, and truth."""

    candidates: tuple[CandidateConstraint, ...]
    vocab: frozenset[str]
    truth: ConstraintSet


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    # (theta, constraint type) -> macro-averaged metrics over the runs
    cells: dict[tuple[float, ConstraintType], MacroAverage]
    theta_star: float

    def to_csv(self) -> str:
        lines = ["theta,type,precision,recall,f1"]
        for theta in self.grid:
            for ctype in ConstraintType:
                m = self.cells[(theta, ctype)]
                lines.append(
                    f"{theta:.2f},{ctype.short_name},{m.precision:.6f},{m.recall:.6f},{m.f1:.6f}"
                )
        return "".join(line + "\n" for line in lines)


def default_grid(step: float = 0.05) -> tuple[float, ...]:
    n = round(1.0 / step)
    return tuple(round(i * step, 10) for i in range(n + 1))


def sweep_theta(
    runs: Sequence[SweepRun], grid: Sequence[float] | None = None
) -> SweepResult:
    """Filter the candidates at every theta and evaluate per constraint type.

    theta_star is the grid value maximizing the mean macro F1 over all types;
    ties resolve to the smallest theta.
    """
    thetas = tuple(grid) if grid is not None else default_grid()
    if list(thetas) != sorted(thetas):
        raise ValueError("grid must be sorted ascending")
    if not runs:
        raise ValueError("no runs to sweep")

    cells: dict[tuple[float, ConstraintType], MacroAverage] = {}
    best_theta = thetas[0]
    best_f1 = -1.0
    for theta in thetas:
        filtered = [
            filter_candidates(run.candidates, run.vocab, FilterConfig(theta)).constraints
            for run in runs
        ]
        mean_f1 = 0.0
        for ctype in ConstraintType:
            report = evaluate_corpus(
                [(pred, run.truth) for pred, run in zip(filtered, runs)], scenario=ctype
            )
            cells[(theta, ctype)] = report.macro
            mean_f1 += report.macro.f1
        mean_f1 /= len(ConstraintType)
        if mean_f1 > best_f1:
            best_f1 = mean_f1
            best_theta = theta
    return SweepResult(thetas, cells, best_theta)


def split_corpus(
    repo: Sequence[T],
    ratios: tuple[float, float, float] = (0.75, 0.15, 0.10),
    seed: int = 0,
) -> tuple[list[T], list[T], list[T]]:
    """Seed-deterministic train/validation/test split.

    Validation and test sizes are floor-rounded; the remainder goes to train.
    """
    if not repo:
        raise ValueError("empty repository")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    items = list(repo)
    random.Random(seed).shuffle(items)
    n = len(items)
    n_val = math.floor(ratios[1] * n)
    n_test = math.floor(ratios[2] * n)
    n_train = n - n_val - n_test
    return (
        items[:n_train],
        items[n_train : n_train + n_val],
        items[n_train + n_val :],
    )
