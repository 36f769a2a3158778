#!/usr/bin/env python3
"""Regenerate the committed toy net repository under fixtures/toy_repo/.

Dev-time tool only: it needs the semadkit package installed. The trainer
itself never imports semadkit; it consumes the exported pair files.

Net sizes stay at 3-5 activities so no single (net, constraint type) slot
holds more ground-truth constraints than a 10-beam query can return.
"""

import random
from pathlib import Path

from semadkit.netgen import WORD_LABELS, random_loopfree_net

SEED = 7700
OUT = Path(__file__).resolve().parent.parent / "fixtures" / "toy_repo"


HELDOUT = OUT.parent / "heldout"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    HELDOUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    for i in range(20):
        n_act = rng.randint(3, 5)
        net = random_loopfree_net(n_act, seed=rng.randrange(10**9), labels=WORD_LABELS)
        (OUT / f"toy{i:02d}.json").write_text(net.to_json())
    print(f"wrote 20 nets to {OUT}")
    # held-out nets: same label pool, unseen combinations and structures
    held_rng = random.Random(SEED + 1)
    for i in range(3):
        n_act = held_rng.randint(3, 5)
        net = random_loopfree_net(n_act, seed=held_rng.randrange(10**9), labels=WORD_LABELS)
        (HELDOUT / f"held{i}.json").write_text(net.to_json())
    print(f"wrote 3 nets to {HELDOUT}")


if __name__ == "__main__":
    main()
