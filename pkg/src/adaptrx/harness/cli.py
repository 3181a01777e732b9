"""Command-line interface.

Every subcommand reads the same config format and writes deterministic
CSVs into ``--out``::

    adaptrx train     --config desk.cfg --out runs/train
    adaptrx sweep     --config desk.cfg --set model.checkpoint=runs/train/checkpoint.npz --out runs/sweep
    adaptrx recovery  --config desk.cfg --set model.checkpoint=... --out runs/recovery
    adaptrx continual --config desk.cfg --set model.checkpoint=... --out runs/continual
    adaptrx gradcheck --out runs/gradcheck
    adaptrx delay     --set delay.t_pre=0.5 --out runs/delay

Settings resolve in order: built-in defaults, then the --config file, then
each --set (repeatable), then --seed (shorthand for --set seed=N).
"""

from __future__ import annotations

import argparse
import sys
from typing import Callable

from ..errors import ConfigurationError
from .config import ExperimentConfig, config_hash, load_config, parse_overrides
from .runs import (
    run_ber_sweep,
    run_continual,
    run_delay_model,
    run_gradcheck,
    run_offline_train,
    run_shift_recovery,
)

_COMMANDS: dict[str, tuple[Callable, str]] = {
    "train": (run_offline_train, "train a network offline and save a checkpoint"),
    "sweep": (run_ber_sweep, "BER versus SNR for each receiver and range"),
    "recovery": (run_shift_recovery, "fine-tune after a delay-spread shift"),
    "continual": (run_continual, "drift tracking against a frozen twin"),
    "gradcheck": (run_gradcheck, "finite-difference audit of the gradients"),
    "delay": (run_delay_model, "classify pipeline timings into a cadence"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptrx",
        description="link-level simulation and online-learning testbed "
                    "for neural OFDM receivers")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="config file of dotted 'key = value' lines")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key "
                       "(repeatable, applied after --config)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (same as --set seed=N)")
        p.add_argument("--out", required=True,
                       help="output directory for CSVs and artifacts")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = parse_overrides(list(args.overrides))
    if args.seed is not None:
        overrides.append(("seed", args.seed))
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        print(f"config hash {config_hash(cfg)}, seed {cfg.seed}")
        command, _ = _COMMANDS[args.command]
        command(cfg, args.out)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
