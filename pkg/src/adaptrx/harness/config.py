"""Experiment configuration: dataclass tree, file format, overrides, hashing.

Config files are plain text, one dotted key per line::

    # comment
    link.snr_db = 20.0
    pilot.design = "fully_scattered"
    run.snr_grid_db = [5, 10, 15, 20, 25, 30]

Values are parsed as JSON scalars / arrays, with a bare-word fallback to
string so unquoted names like ``fully_scattered`` also work.  Unknown keys
are rejected rather than ignored, so a typo cannot silently fall back to a
default.  The same ``key = value`` syntax is accepted by the CLI's ``--set``
flag, which is applied after the file.

The config hash is a SHA-256 digest of the fully resolved key/value dump
(sorted, canonical JSON values), so two runs share a hash exactly when every
effective setting matches, regardless of file formatting or override order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..errors import ConfigurationError
from ..nn.model import NetConfig
from ..online.delay import DelayParams, UpdatePolicy, classify_case
from ..online.drift import DriftSchedule
from ..online.trainer import Architecture
from ..phy.channel import LinkConfig
from ..pilots import PilotDesign

# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------


@dataclass
class LinkSection:
    """OFDM grid, antennas, modulation, and operating SNR."""

    symbols: int = 14
    subcarriers: int = 64
    antennas: int = 2
    mod_order: int = 64
    spacing_hz: float = 15e3
    snr_db: float = 20.0


@dataclass
class ChannelSection:
    """Power-delay profile shape and the delay-spread ranges used by runs."""

    taps: int = 8
    decay_db: float = 20.0
    tau_lo_ns: float = 40.0
    tau_hi_ns: float = 50.0
    shift_lo_ns: float = 400.0
    shift_hi_ns: float = 410.0


@dataclass
class PilotSection:
    """Pilot design selection and masking fraction."""

    design: str = "fully_scattered"
    density: float = 2.0 / 14.0
    hybrid_fixed_fraction: float = 0.5
    extra_pilots: int = 32
    mask_fraction: float = 0.5


@dataclass
class ModelSection:
    """Network size and the checkpoint consumed by evaluation commands."""

    width: int = 64
    blocks: int = 4
    kernel: int = 3
    gate_bias_init: float = 1.0
    param_budget: int = 0  # 0 disables the budget check
    checkpoint: str = ""  # input checkpoint path ("" = none)


@dataclass
class TrainSection:
    """Sample budgets, batch size, and optimizer settings.

    The offline learning rate decays by ``decay_factor`` each time the
    consumed sample fraction crosses an entry of ``decay_points``.
    """

    offline_samples: int = 50_000
    batch_size: int = 16
    lr_offline: float = 1e-3
    lr_online: float = 1e-4
    decay_points: list[float] = field(default_factory=lambda: [0.7, 0.9])
    decay_factor: float = 0.3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class DelaySection:
    """Stage timings of the receive pipeline, in units of one batch's inference."""

    t_pre: float = 0.5
    d_post: float = 0.5
    i_inf: float = 1.0
    z_bwd: float = 2.0
    m_parallel: int = 1


@dataclass
class DriftSection:
    """Delay-spread drift schedule for continual runs."""

    variant: str = "step_slow"
    step_ns: float = 20.0
    period_samples: int = 16_000
    walk_step_lo_ns: float = 0.0
    walk_step_hi_ns: float = 40.0
    walk_interval_lo: int = 160
    walk_interval_hi: int = 2_400
    persistence: float = 0.8
    tau_start_ns: float = 40.0
    tau_min_ns: float = 40.0
    tau_max_ns: float = 400.0
    span_ns: float = 10.0


@dataclass
class RunSection:
    """Per-command knobs: run lengths, sweep grids, receiver lists."""

    architecture: str = "dual"
    total_batches: int = 5_000
    window: int = 50
    snr_grid_db: list[float] = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    sweep_frames: int = 80
    distributions: list[str] = field(default_factory=lambda: ["matched", "shifted"])
    receivers: list[str] = field(
        default_factory=lambda: ["neural-fixed", "lmmse-perfect", "lmmse-imperfect"]
    )
    adapt_budgets: list[int] = field(default_factory=lambda: [2_000, 5_000, 10_000, 20_000])
    eval_frames: int = 160


@dataclass
class ExperimentConfig:
    """Everything a run command needs, grouped into sections.

    ``seed`` is the master seed; every random stream in a run is derived
    from it plus a purpose label, so a config file fully determines a run.
    """

    seed: int = 0
    link: LinkSection = field(default_factory=LinkSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    pilot: PilotSection = field(default_factory=PilotSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    delay: DelaySection = field(default_factory=DelaySection)
    drift: DriftSection = field(default_factory=DriftSection)
    run: RunSection = field(default_factory=RunSection)

    # -- builders into library objects ------------------------------------

    def link_config(self) -> LinkConfig:
        s = self.link
        return LinkConfig(
            symbols=s.symbols,
            subcarriers=s.subcarriers,
            antennas=s.antennas,
            mod_order=s.mod_order,
            spacing_hz=s.spacing_hz,
            snr_db=s.snr_db,
        )

    def pilot_design(self) -> PilotDesign:
        s = self.pilot
        return PilotDesign(
            kind=s.design,
            density=s.density,
            hybrid_fixed_fraction=s.hybrid_fixed_fraction,
            extra_pilots=s.extra_pilots,
        )

    def net_config(self) -> NetConfig:
        from ..pilots import input_channels
        from ..phy.modem import bits_per_symbol

        m = self.model
        return NetConfig(
            in_channels=input_channels(self.link.antennas),
            out_bits=bits_per_symbol(self.link.mod_order),
            width=m.width,
            blocks=m.blocks,
            kernel=m.kernel,
            gate_bias_init=m.gate_bias_init,
            param_budget=m.param_budget if m.param_budget > 0 else None,
        )

    def delay_params(self) -> DelayParams:
        s = self.delay
        return DelayParams(
            t_pre=s.t_pre,
            d_post=s.d_post,
            i_inf=s.i_inf,
            z_bwd=s.z_bwd,
            n_batch=self.train.batch_size,
            m_parallel=s.m_parallel,
        )

    def update_policy(self) -> UpdatePolicy:
        return classify_case(self.delay_params())

    def drift_schedule(self) -> DriftSchedule:
        s = self.drift
        return DriftSchedule(
            variant=s.variant,
            step_ns=s.step_ns,
            period_samples=s.period_samples,
            walk_step_lo_ns=s.walk_step_lo_ns,
            walk_step_hi_ns=s.walk_step_hi_ns,
            walk_interval_lo=s.walk_interval_lo,
            walk_interval_hi=s.walk_interval_hi,
            persistence=s.persistence,
            tau_start_ns=s.tau_start_ns,
            tau_min_ns=s.tau_min_ns,
            tau_max_ns=s.tau_max_ns,
            span_ns=s.span_ns,
        )

    def architecture(self) -> Architecture:
        return Architecture(self.run.architecture)


_SECTIONS = ("link", "channel", "pilot", "model", "train", "delay", "drift", "run")

# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _parse_value(text: str) -> Any:
    """Parse a value as JSON, falling back to a bare string."""
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _coerce(key: str, raw: Any, template: Any) -> Any:
    """Coerce ``raw`` to the type of the default value ``template``."""
    if isinstance(template, bool):
        if isinstance(raw, bool):
            return raw
        raise ConfigurationError(f"{key}: expected true/false, got {raw!r}")
    if isinstance(template, int):
        if isinstance(raw, bool):
            raise ConfigurationError(f"{key}: expected an integer, got {raw!r}")
        if isinstance(raw, int):
            return raw
        if isinstance(raw, float) and raw.is_integer():
            return int(raw)
        raise ConfigurationError(f"{key}: expected an integer, got {raw!r}")
    if isinstance(template, float):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigurationError(f"{key}: expected a number, got {raw!r}")
        return float(raw)
    if isinstance(template, str):
        if not isinstance(raw, str):
            raise ConfigurationError(f"{key}: expected a string, got {raw!r}")
        return raw
    if isinstance(template, list):
        if not isinstance(raw, list):
            raise ConfigurationError(f"{key}: expected a list, got {raw!r}")
        if template:
            elem = template[0]
            return [_coerce(f"{key}[{i}]", v, elem) for i, v in enumerate(raw)]
        return list(raw)
    raise ConfigurationError(f"{key}: unsupported config field type {type(template).__name__}")


def apply_setting(cfg: ExperimentConfig, key: str, raw: Any) -> None:
    """Set one dotted key on the config in place, with type coercion."""
    parts = key.split(".")
    if len(parts) == 1:
        if key != "seed":
            raise ConfigurationError(f"unknown config key {key!r}")
        cfg.seed = _coerce(key, raw, cfg.seed)
        return
    if len(parts) != 2:
        raise ConfigurationError(f"config keys have at most one dot: {key!r}")
    section_name, field_name = parts
    if section_name not in _SECTIONS:
        raise ConfigurationError(f"unknown config section {section_name!r} in {key!r}")
    section = getattr(cfg, section_name)
    names = {f.name for f in dataclasses.fields(section)}
    if field_name not in names:
        raise ConfigurationError(f"unknown config key {key!r}")
    template = getattr(section, field_name)
    setattr(section, field_name, _coerce(key, raw, template))


def parse_overrides(pairs: list[str]) -> list[tuple[str, Any]]:
    """Parse ``--set key=value`` strings into (key, parsed value) tuples."""
    out: list[tuple[str, Any]] = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"override must look like key=value: {pair!r}")
        key, _, value = pair.partition("=")
        key = key.strip()
        if not key:
            raise ConfigurationError(f"override has an empty key: {pair!r}")
        out.append((key, _parse_value(value)))
    return out


def load_config(
    path: str | Path | None = None,
    overrides: list[tuple[str, Any]] | None = None,
) -> ExperimentConfig:
    """Build a config from defaults, an optional file, and optional overrides."""
    cfg = ExperimentConfig()
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = stripped.partition("=")
            apply_setting(cfg, key.strip(), _parse_value(value))
    for key, value in overrides or ():
        apply_setting(cfg, key, value)
    return cfg


# ---------------------------------------------------------------------------
# dumping and hashing
# ---------------------------------------------------------------------------


def dump_config(cfg: ExperimentConfig) -> str:
    """Render the fully resolved config as sorted ``key = value`` lines."""
    items: list[tuple[str, Any]] = [("seed", cfg.seed)]
    for section_name in _SECTIONS:
        section = getattr(cfg, section_name)
        for f in dataclasses.fields(section):
            items.append((f"{section_name}.{f.name}", getattr(section, f.name)))
    items.sort(key=lambda kv: kv[0])
    lines = [f"{k} = {json.dumps(v)}" for k, v in items]
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """Short stable digest of the fully resolved configuration."""
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()[:12]


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
]
