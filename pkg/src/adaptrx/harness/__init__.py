"""Experiment harness: config files, run commands, and the CLI entry point."""

from .config import (
    ChannelSection,
    DelaySection,
    DriftSection,
    ExperimentConfig,
    LinkSection,
    ModelSection,
    PilotSection,
    RunSection,
    TrainSection,
    apply_setting,
    config_hash,
    dump_config,
    load_config,
    parse_overrides,
)
from .runs import (
    run_ber_sweep,
    run_continual,
    run_delay_model,
    run_gradcheck,
    run_offline_train,
    run_shift_recovery,
)

__all__ = [
    "ChannelSection",
    "DelaySection",
    "DriftSection",
    "ExperimentConfig",
    "LinkSection",
    "ModelSection",
    "PilotSection",
    "RunSection",
    "TrainSection",
    "apply_setting",
    "config_hash",
    "dump_config",
    "load_config",
    "parse_overrides",
    "run_ber_sweep",
    "run_continual",
    "run_delay_model",
    "run_gradcheck",
    "run_offline_train",
    "run_shift_recovery",
]
