"""Command-line pipeline driver.

Every stage is a subcommand reading and writing the toolkit's file formats,
so the whole detection pipeline composes from files:

    playout -> gen-truth -> noise -> (mine | filter) -> check -> eval

Exit codes: 0 success, 1 validation error, 2 I/O error, 64 usage error.
All randomized stages take --seed (falling back to the SEMADKIT_SEED
environment variable), and reruns with identical inputs and seeds produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .checker import check, flag_traces
from .constraints import (
    ConstraintSet,
    ConstraintSyntaxError,
    ConstraintType,
    lookup_type,
)
from .evaluation import (
    EvalReport,
    Scenario,
    SweepRun,
    default_grid,
    evaluate_corpus,
    sweep_theta,
)
from .gateway import (
    FilterConfig,
    export_training_pairs,
    filter_candidates,
    ingest_candidates,
    write_training_pairs,
)
from .logs import LabelError, LogParseError, load_xes, save_xes
from .miner import MinerConfig, mine, scores_csv
from .nets import (
    NetStructureError,
    PlayoutError,
    Soundness,
    TruncatedLanguageError,
    check_soundness,
    language_as_log,
    load_net,
    playout_exhaustive,
    playout_sample,
    truth_from_language,
)
from .noise import NoiseConfig, expand_and_corrupt, write_noise_records


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage errors instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


class _Fmt(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("SEMADKIT_SEED")
    return int(env) if env else 0


def _emit(args, summary: dict, human: list[str]) -> None:
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for line in human:
            print(line)


def _parse_scenario(text: str) -> Scenario:
    if text.lower() in ("all", "evf"):
        return text.lower()
    return lookup_type(text)


def _scenario_label(scenario: Scenario) -> str:
    if isinstance(scenario, ConstraintType):
        return scenario.short_name
    return {"evf": "EvF", "all": "All"}[scenario]


def _report_dict(report: EvalReport) -> dict:
    return {
        "scenario": _scenario_label(report.scenario),
        "per_log": [
            {
                "tp": m.tp,
                "fp": m.fp,
                "fn": m.fn,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
            }
            for m in report.per_log
        ],
        "macro": {
            "precision": report.macro.precision,
            "recall": report.macro.recall,
            "f1": report.macro.f1,
        },
        "micro": {
            "tp": report.micro.tp,
            "fp": report.micro.fp,
            "fn": report.micro.fn,
            "precision": report.micro.precision,
            "recall": report.micro.recall,
            "f1": report.micro.f1,
        },
    }


# --- subcommands -------------------------------------------------------------


def _cmd_validate_net(args) -> int:
    net = load_net(args.net)
    result = check_soundness(net, state_bound=args.state_bound)
    summary = {
        "net": str(args.net),
        "places": len(net.places),
        "transitions": len(net.transitions),
        "activities": len(net.activity_labels()),
        "soundness": result.status.value,
        "reason": result.reason,
    }
    _emit(
        args,
        summary,
        [
            f"{args.net}: {len(net.places)} places, {len(net.transitions)} transitions, "
            f"{len(net.activity_labels())} activities",
            f"soundness: {result.status.value}" + (f" ({result.reason})" if result.reason else ""),
        ],
    )
    return 0 if result.status is not Soundness.UNSOUND else 1


def _cmd_playout(args) -> int:
    net = load_net(args.net)
    name = Path(args.net).stem.removesuffix(".net")
    if args.sample:
        log = playout_sample(
            net, args.sample, max_len=args.max_len, seed=_resolve_seed(args.seed), name=name
        )
        complete = None
    else:
        language = playout_exhaustive(net, max_len=args.max_len, max_variants=args.max_variants)
        log = language_as_log(language, name=name)
        complete = language.complete
    save_xes(log, args.out)
    summary = {"out": str(args.out), "traces": len(log), "complete": complete}
    _emit(args, summary, [f"wrote {len(log)} traces to {args.out}"])
    return 0


def _cmd_gen_truth(args) -> int:
    net = load_net(args.net)
    language = playout_exhaustive(net, max_len=args.max_len, max_variants=args.max_variants)
    truth = truth_from_language(
        language, net.activity_labels(), allow_incomplete=args.allow_incomplete
    )
    obj = json.loads(truth.to_json())
    if not language.complete:
        obj["approximate"] = True
    Path(args.out).write_text(json.dumps(obj, indent=2) + "\n")
    summary = {"out": str(args.out), "constraints": len(truth), "complete": language.complete}
    _emit(args, summary, [f"wrote {len(truth)} constraints to {args.out}"])
    return 0


def _cmd_noise(args) -> int:
    log = load_xes(args.log)
    cfg = NoiseConfig(
        target_traces=args.target_traces,
        noisy_fraction=args.noisy_fraction,
        ops_per_noisy_trace=args.ops_per_trace,
        seed=_resolve_seed(args.seed),
    )
    noisy, records = expand_and_corrupt(log, cfg)
    save_xes(noisy, args.out)
    records_path = Path(args.out).with_suffix("").as_posix() + ".records.jsonl"
    Path(records_path).write_text(write_noise_records(records))
    summary = {
        "out": str(args.out),
        "records": records_path,
        "traces": len(noisy),
        "perturbed": len(records),
    }
    _emit(
        args,
        summary,
        [f"wrote {len(noisy)} traces ({len(records)} perturbed) to {args.out}"],
    )
    return 0


def _cmd_mine(args) -> int:
    log = load_xes(args.log)
    cfg = MinerConfig(
        min_support=args.min_support,
        min_confidence=args.min_confidence,
        min_interest=args.min_interest,
    )
    mined = mine(log, cfg)
    constraints = ConstraintSet(m.constraint for m in mined)
    Path(args.out).write_text(constraints.to_json())
    if args.scores_csv:
        Path(args.scores_csv).write_text(scores_csv(mined))
    summary = {"out": str(args.out), "constraints": len(constraints)}
    _emit(args, summary, [f"mined {len(constraints)} constraints into {args.out}"])
    return 0


def _cmd_export_train(args) -> int:
    net_paths = sorted(Path(args.nets).glob("*.json"))
    if not net_paths:
        raise ValueError(f"no *.json nets found in {args.nets}")
    repo = []
    for path in net_paths:
        net = load_net(path)
        if args.truth:
            truth_path = Path(args.truth) / (path.stem + ".json")
            truth = ConstraintSet.from_json(truth_path.read_text())
        else:
            language = playout_exhaustive(net, max_len=args.max_len, max_variants=args.max_variants)
            truth = truth_from_language(language, net.activity_labels())
        repo.append((net, truth))
    pairs = export_training_pairs(repo, seed=_resolve_seed(args.seed))
    Path(args.out).write_text(write_training_pairs(pairs))
    summary = {"out": str(args.out), "nets": len(repo), "pairs": len(pairs)}
    _emit(args, summary, [f"exported {len(pairs)} pairs from {len(repo)} nets to {args.out}"])
    return 0


def _cmd_filter(args) -> int:
    log = load_xes(args.log)
    candidates, line_errors = ingest_candidates(Path(args.candidates).read_text())
    result = filter_candidates(candidates, log.alphabet, FilterConfig(args.theta))
    Path(args.out).write_text(result.constraints.to_json())
    if args.rejects:
        Path(args.rejects).write_text(result.rejects_json())
    summary = {
        "out": str(args.out),
        "candidates": len(candidates),
        "line_errors": len(line_errors),
        "accepted": len(result.constraints),
        "rejects": result.rejects,
    }
    human = [
        f"{len(candidates)} candidates ({len(line_errors)} bad lines), "
        f"{len(result.constraints)} accepted at theta={args.theta}",
        f"rejects: {result.rejects}",
    ]
    for err in line_errors:
        human.append(f"line {err.line}: {err.reason}")
    _emit(args, summary, human)
    return 0


def _cmd_check(args) -> int:
    log = load_xes(args.log)
    constraints = ConstraintSet.from_json(Path(args.constraints).read_text())
    report = check(log, constraints)
    Path(args.out).write_text(report.to_json())
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    flagged = flag_traces(report)
    summary = {
        "out": str(args.out),
        "traces": report.total_traces,
        "flagged": len(flagged),
        "violated_constraints": len(report.violations_by_constraint),
    }
    _emit(
        args,
        summary,
        [f"{len(flagged)}/{report.total_traces} traces flagged by "
         f"{len(report.violations_by_constraint)} constraints; report in {args.out}"],
    )
    return 0


def _load_run_pairs(args) -> list[tuple[ConstraintSet, ConstraintSet]]:
    if args.pred_dir or args.truth_dir:
        if not (args.pred_dir and args.truth_dir):
            raise ValueError("--pred-dir and --truth-dir must be used together")
        pred_paths = sorted(Path(args.pred_dir).glob("*.json"))
        if not pred_paths:
            raise ValueError(f"no *.json predictions in {args.pred_dir}")
        runs = []
        for pred_path in pred_paths:
            truth_path = Path(args.truth_dir) / pred_path.name
            if not truth_path.exists():
                raise ValueError(f"no matching truth file for {pred_path.name}")
            runs.append(
                (
                    ConstraintSet.from_json(pred_path.read_text()),
                    ConstraintSet.from_json(truth_path.read_text()),
                )
            )
        return runs
    if not (args.pred and args.truth):
        raise ValueError("provide --pred/--truth files or --pred-dir/--truth-dir")
    return [
        (
            ConstraintSet.from_json(Path(args.pred).read_text()),
            ConstraintSet.from_json(Path(args.truth).read_text()),
        )
    ]


def _cmd_eval(args) -> int:
    runs = _load_run_pairs(args)
    scenario = _parse_scenario(args.scenario)
    report = evaluate_corpus(runs, scenario)
    obj = _report_dict(report)
    Path(args.out).write_text(json.dumps(obj, indent=2) + "\n")
    if args.csv:
        lines = ["scenario,precision,recall,f1"]
        lines.append(
            f"{_scenario_label(scenario)},{report.macro.precision:.6f},"
            f"{report.macro.recall:.6f},{report.macro.f1:.6f}"
        )
        Path(args.csv).write_text("".join(l + "\n" for l in lines))
    summary = {"out": str(args.out), **obj["macro"], "runs": len(runs)}
    _emit(
        args,
        summary,
        [
            f"{_scenario_label(scenario)}: P={report.macro.precision:.3f} "
            f"R={report.macro.recall:.3f} F1={report.macro.f1:.3f} over {len(runs)} run(s)"
        ],
    )
    return 0


def _cmd_sweep(args) -> int:
    cand_paths = sorted(Path(args.cands_dir).glob("*.jsonl"))
    if not cand_paths:
        raise ValueError(f"no *.jsonl candidate files in {args.cands_dir}")
    runs = []
    for cand_path in cand_paths:
        stem = cand_path.stem
        log_path = Path(args.logs_dir) / f"{stem}.xes"
        truth_path = Path(args.truth_dir) / f"{stem}.json"
        if not log_path.exists():
            raise ValueError(f"no log {log_path} for candidates {cand_path.name}")
        if not truth_path.exists():
            raise ValueError(f"no truth {truth_path} for candidates {cand_path.name}")
        candidates, _ = ingest_candidates(cand_path.read_text())
        log = load_xes(log_path)
        truth = ConstraintSet.from_json(truth_path.read_text())
        runs.append(SweepRun(tuple(candidates), log.alphabet, truth))
    result = sweep_theta(runs, grid=default_grid(args.grid_step))
    Path(args.out).write_text(result.to_csv())
    summary = {"out": str(args.out), "theta_star": result.theta_star, "runs": len(runs)}
    _emit(args, summary, [f"theta* = {result.theta_star:.2f}; sweep written to {args.out}"])
    return 0


def _cmd_pipeline(args) -> int:
    net_paths = sorted(Path(args.nets).glob("*.json"))
    if not net_paths:
        raise ValueError(f"no *.json nets found in {args.nets}")
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    seed = _resolve_seed(args.seed)

    run_config = {
        "seed": seed,
        "target_traces": args.target_traces,
        "noisy_fraction": args.noisy_fraction,
        "ops_per_trace": args.ops_per_trace,
        "min_support": args.min_support,
        "min_confidence": args.min_confidence,
        "min_interest": args.min_interest,
        "theta": args.theta,
        "max_len": args.max_len,
        "max_variants": args.max_variants,
        "mode": "filter" if args.cands_dir else "mine",
        "nets": [p.name for p in net_paths],
    }
    (out_root / "run_config.json").write_text(json.dumps(run_config, indent=2, sort_keys=True) + "\n")

    runs: list[tuple[ConstraintSet, ConstraintSet]] = []
    flagged_total = 0
    for index, net_path in enumerate(net_paths):
        stem = net_path.stem.removesuffix(".net")
        net_dir = out_root / stem
        net_dir.mkdir(exist_ok=True)
        net = load_net(net_path)

        language = playout_exhaustive(net, max_len=args.max_len, max_variants=args.max_variants)
        clean = language_as_log(language, name=stem)
        save_xes(clean, net_dir / "clean.xes")

        truth = truth_from_language(language, net.activity_labels())
        (net_dir / "truth.json").write_text(truth.to_json())

        noisy, records = expand_and_corrupt(
            clean,
            NoiseConfig(
                target_traces=args.target_traces,
                noisy_fraction=args.noisy_fraction,
                ops_per_noisy_trace=args.ops_per_trace,
                seed=seed + index,
            ),
        )
        save_xes(noisy, net_dir / "noisy.xes")
        (net_dir / "noisy.records.jsonl").write_text(write_noise_records(records))

        if args.cands_dir:
            cand_path = Path(args.cands_dir) / f"{stem}.jsonl"
            if not cand_path.exists():
                raise ValueError(f"no candidate file {cand_path} for net {net_path.name}")
            candidates, _ = ingest_candidates(cand_path.read_text())
            result = filter_candidates(candidates, noisy.alphabet, FilterConfig(args.theta))
            pred = result.constraints
            (net_dir / "rejects.json").write_text(result.rejects_json())
        else:
            mined = mine(
                noisy,
                MinerConfig(
                    min_support=args.min_support,
                    min_confidence=args.min_confidence,
                    min_interest=args.min_interest,
                ),
            )
            (net_dir / "scores.csv").write_text(scores_csv(mined))
            pred = ConstraintSet(m.constraint for m in mined)
        (net_dir / "pred.json").write_text(pred.to_json())

        report = check(noisy, pred)
        (net_dir / "check_report.json").write_text(report.to_json())
        (net_dir / "check_report.csv").write_text(report.to_csv())
        flagged_total += len(flag_traces(report))
        runs.append((pred, truth))

    scenarios: list[Scenario] = ["all", "evf", *ConstraintType]
    eval_obj = {}
    csv_lines = ["scenario,precision,recall,f1"]
    for scenario in scenarios:
        report = evaluate_corpus(runs, scenario)
        label = _scenario_label(scenario)
        eval_obj[label] = _report_dict(report)
        csv_lines.append(
            f"{label},{report.macro.precision:.6f},{report.macro.recall:.6f},{report.macro.f1:.6f}"
        )
    (out_root / "eval.json").write_text(json.dumps(eval_obj, indent=2, sort_keys=True) + "\n")
    (out_root / "eval.csv").write_text("".join(l + "\n" for l in csv_lines))

    summary = {
        "out": str(out_root),
        "nets": len(net_paths),
        "flagged_traces": flagged_total,
        "macro_f1_all": eval_obj["All"]["macro"]["f1"],
    }
    _emit(
        args,
        summary,
        [
            f"pipeline over {len(net_paths)} nets done; "
            f"macro F1 (exact) = {eval_obj['All']['macro']['f1']:.3f}; outputs in {out_root}"
        ],
    )
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semadkit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_parser(name, help_text):
        return sub.add_parser(name, help=help_text, formatter_class=_Fmt)

    def add_json(p):
        p.add_argument("--json", action="store_true", help="machine-readable summary on stdout")

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to SEMADKIT_SEED, then 0)")

    def add_bounds(p):
        p.add_argument("--max-len", type=int, default=50, help="max trace length")
        p.add_argument("--max-variants", type=int, default=5000,
                       help="max distinct variants for exhaustive playout")

    def add_miner_flags(p):
        p.add_argument("--min-support", type=float, default=0.95,
                       help="minimum satisfied-trace fraction")
        p.add_argument("--min-confidence", type=float, default=0.25,
                       help="minimum satisfied fraction among activated traces")
        p.add_argument("--min-interest", type=float, default=0.125,
                       help="minimum confidence damped by label frequency")

    def add_noise_flags(p):
        p.add_argument("--target-traces", type=int, default=1000,
                       help="size of the expanded log")
        p.add_argument("--noisy-fraction", type=float, default=0.3,
                       help="fraction of traces to perturb")
        p.add_argument("--ops-per-trace", type=int, default=1,
                       help="operations applied to each perturbed trace")

    p = add_parser("validate-net", "structural validation and soundness check")
    p.add_argument("net", help="workflow-net JSON file")
    p.add_argument("--state-bound", type=int, default=100_000,
                   help="max markings to explore")
    add_json(p)
    p.set_defaults(func=_cmd_validate_net)

    p = add_parser("playout", "generate an event log from a net")
    p.add_argument("net", help="workflow-net JSON file")
    p.add_argument("--out", required=True, help="output XES path")
    add_bounds(p)
    p.add_argument("--sample", type=int, default=None, metavar="N",
                   help="sample N random traces instead of exhaustive enumeration")
    add_seed(p)
    add_json(p)
    p.set_defaults(func=_cmd_playout)

    p = add_parser("gen-truth", "extract ground-truth constraints from a net")
    p.add_argument("net", help="workflow-net JSON file")
    p.add_argument("--out", required=True, help="output constraint-set JSON path")
    add_bounds(p)
    p.add_argument("--allow-incomplete", action="store_true",
                   help="accept a truncated language; output is marked approximate")
    add_json(p)
    p.set_defaults(func=_cmd_gen_truth)

    p = add_parser("noise", "expand a log and inject control-flow noise")
    p.add_argument("log", help="clean XES log")
    p.add_argument("--out", required=True,
                   help="output XES path (records sidecar written next to it)")
    add_noise_flags(p)
    add_seed(p)
    add_json(p)
    p.set_defaults(func=_cmd_noise)

    p = add_parser("mine", "mine constraints from a log")
    p.add_argument("log", help="XES log to mine")
    p.add_argument("--out", required=True, help="output constraint-set JSON path")
    p.add_argument("--scores-csv", default=None, help="also write per-constraint scores CSV")
    add_miner_flags(p)
    add_json(p)
    p.set_defaults(func=_cmd_mine)

    p = add_parser("export-train", "export training pairs from a net repository")
    p.add_argument("--nets", required=True, help="directory of workflow-net JSON files")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--truth", default=None,
                   help="directory of precomputed truth sets (default: extract on the fly)")
    add_seed(p)
    add_bounds(p)
    add_json(p)
    p.set_defaults(func=_cmd_export_train)

    p = add_parser("filter", "filter generator candidates by vocabulary and threshold")
    p.add_argument("candidates", help="candidate JSONL file")
    p.add_argument("--log", required=True, help="target log (its labels form the vocabulary)")
    p.add_argument("--theta", type=float, default=0.7,
                   help="probability threshold (strictly exceeded to pass)")
    p.add_argument("--out", required=True, help="output constraint-set JSON path")
    p.add_argument("--rejects", default=None, help="write reject tallies JSON here")
    add_json(p)
    p.set_defaults(func=_cmd_filter)

    p = add_parser("check", "check a log against a constraint set")
    p.add_argument("log", help="XES log to check")
    p.add_argument("--constraints", required=True, help="constraint-set JSON file")
    p.add_argument("--out", required=True, help="violation report JSON path")
    p.add_argument("--csv", default=None, help="also write frequency CSV")
    add_json(p)
    p.set_defaults(func=_cmd_check)

    p = add_parser("eval", "score predicted constraints against ground truth")
    p.add_argument("--pred", default=None, help="predicted constraint-set JSON file")
    p.add_argument("--truth", default=None, help="ground-truth constraint-set JSON file")
    p.add_argument("--pred-dir", default=None, help="directory of predictions (corpus mode)")
    p.add_argument("--truth-dir", default=None,
                   help="directory of matching truth files (corpus mode)")
    p.add_argument("--scenario", default="all",
                   help='"all", "evf", or a constraint type name')
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", default=None, help="also write a one-row metrics CSV")
    add_json(p)
    p.set_defaults(func=_cmd_eval)

    p = add_parser("sweep", "theta sweep over candidate corpora")
    p.add_argument("--cands-dir", required=True, help="directory of per-log candidate JSONL files")
    p.add_argument("--logs-dir", required=True, help="directory of matching XES logs")
    p.add_argument("--truth-dir", required=True, help="directory of matching truth JSON files")
    p.add_argument("--grid-step", type=float, default=0.05, help="theta grid step")
    p.add_argument("--out", required=True, help="sweep CSV path")
    add_json(p)
    p.set_defaults(func=_cmd_sweep)

    p = add_parser("pipeline", "run the full pipeline over a directory of nets")
    p.add_argument("--nets", required=True, help="directory of workflow-net JSON files")
    p.add_argument("--out", required=True, help="output directory")
    add_seed(p)
    add_noise_flags(p)
    add_miner_flags(p)
    p.add_argument("--theta", type=float, default=0.7,
                   help="filter threshold when --cands-dir is given")
    p.add_argument("--cands-dir", default=None,
                   help="per-net candidate JSONL dir; switches the prediction stage "
                        "from mining to filtering")
    add_bounds(p)
    add_json(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        NetStructureError,
        LogParseError,
        LabelError,
        ConstraintSyntaxError,
        TruncatedLanguageError,
        PlayoutError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
