#!/usr/bin/env python3
"""Train the desk-scale receiver offline and save a checkpoint.

Wraps ``adaptrx train`` with the desk config; any extra arguments are
passed through, e.g.::

    python3 scripts/train_offline.py --out runs/train --seed 1
    python3 scripts/train_offline.py --out runs/train --set train.offline_samples=50000
"""
import sys
from pathlib import Path

from adaptrx.harness.cli import main

DESK = Path(__file__).resolve().parents[1] / "configs" / "desk.cfg"

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--config" not in args:
        args = ["--config", str(DESK)] + args
    sys.exit(main(["train", *args]))
