"""Training loop: teacher forcing, AdamW, early stopping on validation loss.

The checkpoint directory holds the weights, the frozen vocabulary, the
config echo, and a per-epoch loss log, so generation can reload everything
without the training data.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import torch
from torch import nn

from .data import BOS, EOS, PAD, Pair, Vocab, load_pairs, tokenize
from .model import GenConfig, Seq2SeqTransformer


def _setup_determinism(cfg: GenConfig) -> None:
    if cfg.deterministic:
        torch.manual_seed(cfg.seed)
        torch.set_num_threads(1)


def _encode_batch(vocab: Vocab, pairs: list[Pair], device) -> tuple[torch.Tensor, torch.Tensor]:
    pad = vocab.stoi[PAD]
    bos, eos = vocab.stoi[BOS], vocab.stoi[EOS]
    srcs = [vocab.encode(p.input) for p in pairs]
    tgts = [[bos] + vocab.encode(p.target) + [eos] for p in pairs]
    src_len = max(len(s) for s in srcs)
    tgt_len = max(len(t) for t in tgts)
    src = torch.full((len(pairs), src_len), pad, dtype=torch.long)
    tgt = torch.full((len(pairs), tgt_len), pad, dtype=torch.long)
    for i, (s, t) in enumerate(zip(srcs, tgts)):
        src[i, : len(s)] = torch.tensor(s)
        tgt[i, : len(t)] = torch.tensor(t)
    return src.to(device), tgt.to(device)


def _epoch_loss(model, vocab, pairs, batch_size, device, optimizer=None) -> float:
    criterion = nn.CrossEntropyLoss(ignore_index=vocab.stoi[PAD])
    total, count = 0.0, 0
    for start in range(0, len(pairs), batch_size):
        batch = pairs[start : start + batch_size]
        src, tgt = _encode_batch(vocab, batch, device)
        logits = model(src, tgt[:, :-1])
        loss = criterion(logits.reshape(-1, logits.size(-1)), tgt[:, 1:].reshape(-1))
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        total += loss.item() * len(batch)
        count += len(batch)
    return total / count


def _reshuffled_validation(pairs: list[Pair], cfg: GenConfig) -> list[Pair]:
    """A validation sample that re-shuffles input label orders.

    The model is supposed to be order-invariant over the label list, so
    fresh permutations of training inputs make a cheap plateau signal
    without holding out constraints.
    """
    rng = random.Random(cfg.seed + 1)
    k = max(1, int(len(pairs) * cfg.val_fraction))
    sample = rng.sample(pairs, k)
    out = []
    for pair in sample:
        type_name, labels = pair.input.split(": ", 1)
        parts = labels.split(", ")
        rng.shuffle(parts)
        out.append(Pair(f"{type_name}: {', '.join(parts)}", pair.target))
    return out


def train(
    pairs_path: str | Path,
    out_dir: str | Path,
    cfg: GenConfig = GenConfig(),
    val_pairs_path: str | Path | None = None,
    device: str = "cpu",
    progress: bool = False,
) -> dict:
    """Fine-tune on the pair file and save a checkpoint directory.

    Returns a summary dict with the final losses and the stopping epoch.
    """
    _setup_determinism(cfg)
    pairs = load_pairs(Path(pairs_path).read_text())
    if val_pairs_path is not None:
        val_pairs = load_pairs(Path(val_pairs_path).read_text())
    else:
        val_pairs = _reshuffled_validation(pairs, cfg)

    vocab = Vocab.build(pairs)
    longest = max(
        len(tokenize(p.input)) for p in pairs + val_pairs
    )
    if longest >= 158:
        raise ValueError(f"an input of {longest} tokens exceeds the position table")

    model = Seq2SeqTransformer(len(vocab), vocab.stoi[PAD], cfg.base_model, cfg.dropout)
    model.to(device)
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.lr)

    order_rng = random.Random(cfg.seed + 2)
    best_val = float("inf")
    best_state = None
    stale = 0
    log_rows = ["epoch,train_loss,val_loss"]
    train_loss = val_loss = float("nan")
    stopped_at = cfg.epochs
    for epoch in range(1, cfg.epochs + 1):
        shuffled = list(pairs)
        order_rng.shuffle(shuffled)
        model.train()
        train_loss = _epoch_loss(model, vocab, shuffled, cfg.batch_size, device, optimizer)
        model.eval()
        with torch.no_grad():
            val_loss = _epoch_loss(model, vocab, val_pairs, cfg.batch_size, device)
        log_rows.append(f"{epoch},{train_loss:.6f},{val_loss:.6f}")
        if progress and (epoch % 10 == 0 or epoch == 1):
            print(f"epoch {epoch}: train {train_loss:.4f} val {val_loss:.4f}")
        if val_loss < best_val - 1e-6:
            best_val = val_loss
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                stopped_at = epoch
                break

    if best_state is not None:
        model.load_state_dict(best_state)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "model.pt")
    (out / "vocab.json").write_text(vocab.to_json())
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    (out / "loss_log.csv").write_text("".join(row + "\n" for row in log_rows))
    return {
        "pairs": len(pairs),
        "val_pairs": len(val_pairs),
        "epochs_run": stopped_at,
        "train_loss": train_loss,
        "val_loss": val_loss,
        "best_val_loss": best_val,
    }


def load_checkpoint(model_dir: str | Path, device: str = "cpu"):
    """Reload (model, vocab, config) from a checkpoint directory."""
    model_dir = Path(model_dir)
    cfg = GenConfig(**json.loads((model_dir / "config.json").read_text()))
    vocab = Vocab.from_json((model_dir / "vocab.json").read_text())
    model = Seq2SeqTransformer(len(vocab), vocab.stoi[PAD], cfg.base_model, cfg.dropout)
    model.load_state_dict(torch.load(model_dir / "model.pt", map_location=device))
    model.to(device)
    model.eval()
    return model, vocab, cfg
