#!/usr/bin/env python3
"""Run `adaptrx continual` with the desk config; extra arguments pass through.

Starts from model.checkpoint when set (recommended):

    python3 scripts/continual_tracking.py --set model.checkpoint=runs/train/checkpoint.npz --out runs/continual
"""
import sys
from pathlib import Path

from adaptrx.harness.cli import main

DESK = Path(__file__).resolve().parents[1] / "configs" / "desk.cfg"

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--config" not in args:
        args = ["--config", str(DESK)] + args
    sys.exit(main(["continual", *args]))
