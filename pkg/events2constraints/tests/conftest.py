import json
import shutil
import subprocess
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent.parent / "fixtures"
TOY_REPO = FIXTURES / "toy_repo"
HELDOUT = FIXTURES / "heldout"

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


def semadkit(*argv) -> subprocess.CompletedProcess:
    """The primary toolkit is driven through its CLI only."""
    return subprocess.run(
        ["semadkit", *map(str, argv)], capture_output=True, text=True, check=False
    )


def net_labels(net_path: Path) -> list[str]:
    """Activity labels straight from the net JSON interchange format."""
    obj = json.loads(net_path.read_text())
    return sorted({t["label"] for t in obj["transitions"] if t["label"] is not None})


def queries_for(labels: list[str]) -> list[str]:
    return [f"{name}: {', '.join(labels)}" for name in TYPE_NAMES]


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Pairs exported from four toy nets, for fast unit tests.

    Three export seeds per net give each constraint three input shuffles,
    the same recipe the end-to-end run uses.
    """
    root = tmp_path_factory.mktemp("mini")
    nets = root / "nets"
    nets.mkdir()
    for name in ("toy00.json", "toy01.json", "toy02.json", "toy04.json"):
        shutil.copy(TOY_REPO / name, nets / name)
    chunks = []
    for seed in (0, 1, 2):
        out = root / f"pairs{seed}.jsonl"
        result = semadkit("export-train", "--nets", nets, "--out", out, "--seed", seed)
        assert result.returncode == 0, result.stderr
        chunks.append(out.read_text())
    pairs = root / "pairs.jsonl"
    pairs.write_text("".join(chunks))
    return {"root": root, "nets": nets, "pairs": pairs}


@pytest.fixture(scope="session")
def mini_checkpoint(mini_corpus):
    """A model overfit on the mini corpus, shared across generation tests."""
    from events2constraints import GenConfig, train

    out = mini_corpus["root"] / "ckpt"
    summary = train(
        mini_corpus["pairs"],
        out,
        GenConfig(epochs=120, batch_size=16, seed=0, patience=30, dropout=0.05),
    )
    assert summary["train_loss"] < 0.3, summary
    return out
