"""CLI: train on exported pairs, answer typed queries with scored candidates.

    events2constraints train --pairs pairs.jsonl --out ckpt/
    events2constraints generate --model ckpt/ --query-file queries.txt \
        --beams 10 --out cands.jsonl

The exchange boundary is files only: pair JSONL in, candidate JSONL out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .beam import generate_file
from .data import PairFormatError
from .model import GenConfig
from .train import load_checkpoint, train


def _cmd_train(args) -> int:
    cfg = GenConfig(
        base_model=args.base_model,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        patience=args.patience,
        val_fraction=args.val_fraction,
        dropout=args.dropout,
    )
    summary = train(
        args.pairs,
        args.out,
        cfg,
        val_pairs_path=args.val_pairs,
        device=args.device,
        progress=not args.json,
    )
    summary["out"] = str(args.out)
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(
            f"trained on {summary['pairs']} pairs for {summary['epochs_run']} epochs; "
            f"final train loss {summary['train_loss']:.4f}, "
            f"val loss {summary['val_loss']:.4f}; checkpoint in {args.out}"
        )
    return 0


def _cmd_generate(args) -> int:
    queries = [
        line.strip()
        for line in Path(args.query_file).read_text().splitlines()
        if line.strip()
    ]
    if not queries:
        raise ValueError(f"no queries in {args.query_file}")
    model, vocab, cfg = load_checkpoint(args.model, device=args.device)
    max_len = args.max_len if args.max_len is not None else cfg.max_output_len
    text = generate_file(model, vocab, queries, beams=args.beams, max_len=max_len,
                         device=args.device)
    Path(args.out).write_text(text)
    lines = text.count("\n")
    if args.json:
        print(json.dumps({"out": str(args.out), "queries": len(queries), "candidates": lines}))
    else:
        print(f"wrote {lines} candidates for {len(queries)} queries to {args.out}")
    return 0


class _Fmt(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="events2constraints", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune the generator on a pair file",
                       formatter_class=_Fmt)
    p.add_argument("--pairs", required=True, help="training-pair JSONL")
    p.add_argument("--out", required=True, help="checkpoint output directory")
    p.add_argument("--val-pairs", default=None,
                   help="held-out pair JSONL for early stopping (default: reshuffled sample)")
    p.add_argument("--base-model", default="tiny", help="architecture preset (tiny, small)")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=20,
                   help="early-stop after this many evals without val improvement")
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--device", default="cpu")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("generate", help="answer typed queries with scored candidates",
                       formatter_class=_Fmt)
    p.add_argument("--model", required=True, help="checkpoint directory")
    p.add_argument("--query-file", required=True, help="one 'Type: labels...' query per line")
    p.add_argument("--beams", type=int, default=10, help="candidates per query")
    p.add_argument("--max-len", type=int, default=None,
                   help="max generated tokens (default: the checkpoint's setting)")
    p.add_argument("--out", required=True, help="candidate JSONL output")
    p.add_argument("--device", default="cpu")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PairFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
