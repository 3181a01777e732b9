"""Continual-operation loop: drifting channel, paired adaptive and
frozen receivers, per-mini-batch trace."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..frames import draw_taus, make_batch
from ..nn import ModelParams, NetConfig, clone_params, net_forward
from ..phy import LinkConfig, ber, windowed_mean
from ..pilots import PilotDesign, build_input
from ..receiver import result_from_llrs
from .delay import UpdatePolicy
from .drift import DriftSchedule, DriftTracker
from .trainer import Architecture, TrainerState, make_trainer, trainer_step


@dataclass(frozen=True)
class TraceRow:
    """One mini-batch of the continual trace."""
    batch: int
    tau_bar_ns: float
    ber_adaptive: float
    ber_fixed: float
    loss: float | None
    updated: bool
    params_version: int


def _batch_ber(results, batch) -> float:
    wrong = 0
    total = 0
    for res, frame in zip(results, batch.frames):
        wrong += int(np.count_nonzero(res.data_bits != frame.tx_bits))
        total += frame.tx_bits.size
    return wrong / total


def run_continual(cfg: LinkConfig, design: PilotDesign, mask_fraction: float,
                  arch: Architecture, policy: UpdatePolicy,
                  schedule: DriftSchedule, net_cfg: NetConfig,
                  init: ModelParams, batches: int, batch_size: int, seed: int,
                  lr: float = 1e-4, taps: int = 8, decay_db: float = 20.0,
                  ts_out: list | None = None) -> list[TraceRow]:
    """Run `batches` mini-batches of drifting channel through an adaptive
    receiver and a frozen copy of the same starting point.

    Both receivers see identical frames (same seed-derived channels,
    noise, payloads, plans, and masks).  The frozen receiver always
    detects with every pilot visible.  Returns the per-batch trace; if
    ts_out is given the trainer state is appended to it for inspection.
    """
    trainer = make_trainer(arch, net_cfg, init, policy, lr=lr)
    frozen = clone_params(init).snapshot()
    drift = DriftTracker(schedule, seed)
    noise_var = cfg.noise_variance
    rows: list[TraceRow] = []
    for b in range(batches):
        lo_s, hi_s = drift.window_s()
        taus = draw_taus(seed, b, lo_s, hi_s, batch_size)
        batch = make_batch(cfg, design, mask_fraction, taus, seed, b,
                           taps=taps, decay_db=decay_db)
        results, info = trainer_step(trainer, batch, noise_var)
        ber_a = _batch_ber(results, batch)

        x_fixed = np.stack([build_input(f.rx, batch.plan, noise_var, None)
                            for f in batch.frames])
        llrs_fixed, _ = net_forward(frozen, net_cfg, x_fixed, want_cache=False)
        fixed_results = [
            result_from_llrs(np.asarray(llrs_fixed[i], dtype=np.float64),
                             batch.plan)
            for i in range(batch.size)]
        ber_f = _batch_ber(fixed_results, batch)

        rows.append(TraceRow(batch=b, tau_bar_ns=drift.tau_bar_ns,
                             ber_adaptive=ber_a, ber_fixed=ber_f,
                             loss=info.loss, updated=info.updated,
                             params_version=info.params_version))
        drift.advance(batch_size)
    if ts_out is not None:
        ts_out.append(trainer)
    return rows


@dataclass
class WindowedTrace:
    """Means over consecutive non-overlapping windows of a continual trace."""
    window: int
    tau_bar_ns: np.ndarray
    ber_adaptive: np.ndarray
    ber_fixed: np.ndarray

    def __len__(self) -> int:
        return self.ber_adaptive.size


def windowed_trace(rows: list[TraceRow], window: int = 50) -> WindowedTrace:
    """Windowed summary of a continual trace, one entry per full window."""
    return WindowedTrace(
        window=window,
        tau_bar_ns=windowed_mean(np.array([r.tau_bar_ns for r in rows]), window),
        ber_adaptive=windowed_mean(np.array([r.ber_adaptive for r in rows]), window),
        ber_fixed=windowed_mean(np.array([r.ber_fixed for r in rows]), window),
    )
