"""Online fine-tuning receivers.

Two ways to fold fine-tuning into a running receiver, both supervised
purely by the hidden (masked) pilots of each mini-batch:

* dual ("train a copy, swap it in"): detection always runs on the live
  parameter set with every pilot visible; a separate training copy sees
  the masked input, takes one optimizer step per update event, and is
  then copied into the live set atomically.  Detection costs two
  forward passes per frame on update batches (one live, one training)
  and never waits on training.

* single ("reuse the forward pass"): one parameter set serves both
  jobs.  Detection runs on the masked input, so the same forward pass
  yields the data LLRs and the masked-pilot LLRs the loss needs; update
  events run backward from that cached pass and step in place (the
  single-threaded step models the inference pause during the update).
  One forward pass per frame, always.

Update events fire exactly at mini-batch indices that are multiples of
the policy cadence.  A training step that produces a non-finite loss or
blows up numerically is skipped and counted, leaving the live
parameters untouched.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, NumericFault
from ..frames import FrameBatch
from ..nn import (
    AdamState,
    ModelParams,
    NetConfig,
    adam_step,
    clone_params,
    copy_into,
    init_adam,
    net_backward,
    net_forward,
)
from ..pilots import build_input, labels_for
from ..receiver import DetectionResult, result_from_llrs
from .delay import UpdatePolicy


class Architecture(enum.Enum):
    DUAL = "dual"
    SINGLE = "single"


@dataclass
class StepCounters:
    frames: int = 0
    inference_passes: int = 0
    training_passes: int = 0
    updates: int = 0
    skipped: int = 0


@dataclass
class StepInfo:
    """What one mini-batch step did."""
    updated: bool
    loss: float | None
    params_version: int


@dataclass
class TrainerState:
    arch: Architecture
    net_cfg: NetConfig
    live: ModelParams
    policy: UpdatePolicy
    adam: AdamState
    training: ModelParams | None = None   # dual only
    batch_count: int = 0
    counters: StepCounters = field(default_factory=StepCounters)


def make_trainer(arch: Architecture, net_cfg: NetConfig, params: ModelParams,
                 policy: UpdatePolicy, lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8) -> TrainerState:
    """Set up online fine-tuning starting from the given parameters.

    The trainer takes ownership of its own copies; the caller's params
    object is never mutated.
    """
    live = clone_params(params)
    training = None
    if arch == Architecture.DUAL:
        training = clone_params(params)
        opt_target = training
    else:
        opt_target = live
    adam = init_adam(opt_target, lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    return TrainerState(arch=arch, net_cfg=net_cfg, live=live, policy=policy,
                        adam=adam, training=training)


def _stack_inputs(batch: FrameBatch, noise_var: float, masked: bool) -> np.ndarray:
    mask = batch.mask if masked else None
    return np.stack([build_input(f.rx, batch.plan, noise_var, mask)
                     for f in batch.frames])


def _stack_labels(batch: FrameBatch):
    labels, emask = labels_for(batch.plan, batch.mask)
    n = batch.size
    return (np.broadcast_to(labels, (n,) + labels.shape),
            np.broadcast_to(emask, (n,) + emask.shape))


def trainer_step(ts: TrainerState, batch: FrameBatch,
                 noise_var: float) -> tuple[list[DetectionResult], StepInfo]:
    """Detect one mini-batch and fine-tune per the update policy."""
    if ts.arch == Architecture.DUAL:
        return _dual_step(ts, batch, noise_var)
    return _single_step(ts, batch, noise_var)


def _results(llrs: np.ndarray, batch: FrameBatch) -> list[DetectionResult]:
    return [result_from_llrs(np.asarray(llrs[i], dtype=np.float64), batch.plan)
            for i in range(batch.size)]


def _dual_step(ts: TrainerState, batch: FrameBatch, noise_var: float):
    fires = ts.batch_count % ts.policy.cadence == 0
    view = ts.live.snapshot()  # one version for the whole mini-batch
    x = _stack_inputs(batch, noise_var, masked=False)
    llrs, _ = net_forward(view, ts.net_cfg, x, want_cache=False)
    ts.counters.frames += batch.size
    ts.counters.inference_passes += batch.size
    results = _results(llrs, batch)

    loss = None
    updated = False
    if fires:
        try:
            x_train = _stack_inputs(batch, noise_var, masked=True)
            labels, emask = _stack_labels(batch)
            _, cache = net_forward(ts.training, ts.net_cfg, x_train,
                                   want_cache=True)
            ts.counters.training_passes += batch.size
            loss, grads = net_backward(ts.training, ts.net_cfg, cache,
                                       labels, emask)
            if np.isfinite(loss):
                adam_step(ts.training, grads, ts.adam)
                copy_into(ts.live, ts.training)
                ts.counters.updates += 1
                updated = True
            else:
                ts.counters.skipped += 1
        except NumericFault:
            ts.counters.skipped += 1
    ts.batch_count += 1
    return results, StepInfo(updated=updated, loss=loss,
                             params_version=view.version)


def _single_step(ts: TrainerState, batch: FrameBatch, noise_var: float):
    fires = ts.batch_count % ts.policy.cadence == 0
    view = ts.live.snapshot()
    x = _stack_inputs(batch, noise_var, masked=True)
    llrs, cache = net_forward(view, ts.net_cfg, x, want_cache=fires)
    ts.counters.frames += batch.size
    ts.counters.inference_passes += batch.size
    results = _results(llrs, batch)

    loss = None
    updated = False
    if fires:
        try:
            labels, emask = _stack_labels(batch)
            loss, grads = net_backward(view, ts.net_cfg, cache, labels, emask)
            if np.isfinite(loss):
                adam_step(ts.live, grads, ts.adam)
                ts.counters.updates += 1
                updated = True
            else:
                ts.counters.skipped += 1
        except NumericFault:
            ts.counters.skipped += 1
    ts.batch_count += 1
    return results, StepInfo(updated=updated, loss=loss,
                             params_version=view.version)
