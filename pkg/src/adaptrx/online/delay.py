"""Update-cadence selection from the pipeline's stage timings.

The receiver pipeline per mini-batch has a pre-processing stage (t_pre),
an inference stage whose per-batch latency is i_inf, and a
post-processing stage (d_post).  Fine-tuning adds one backward pass per
update; with m_parallel inference engines sharing the training engine
and n_batch samples per mini-batch, the extra backward work amortized
per mini-batch is

    b_d = z_bwd * i_inf * m_parallel / n_batch

where z_bwd is the measured backward/forward cost ratio (about 2 for
conv nets: two backward matmuls per forward matmuĺ).

Three service regimes decide how often an update can fire without
stalling the stream, expressed as a cadence k (update every k-th
mini-batch):

* slack: some other stage dominates even with training added,
  max(t_pre, d_post) >= i_inf + b_d, so updates fire every mini-batch
  (k = 1).
* buffered: inference is the bottleneck but the mini-batch is at least
  z_bwd * m_parallel samples, so the backward work fits by skipping to
  every ceil(1 + z_bwd * m_parallel / n_batch)-th batch (k = 2 for any
  batch big enough to qualify).
* saturated: inference is the bottleneck and there is no batching slack
  (n_batch = m_parallel); forward + backward + weight transfer serialize
  and updates fire every third mini-batch (k = 3).

Timings outside these regions (e.g. the bottleneck falls between i_inf
and i_inf + b_d, or 1 < n_batch/m_parallel < z_bwd) get the
conservative k = 3 cadence with the fallback flag raised.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..errors import ConfigurationError


class TimingRegime(enum.Enum):
    SLACK = "slack"
    BUFFERED = "buffered"
    SATURATED = "saturated"


@dataclass(frozen=True)
class DelayParams:
    """Stage timings (arbitrary but common units) and pipeline shape."""
    t_pre: float           # pre-processing latency per mini-batch
    d_post: float          # post-processing latency per mini-batch
    i_inf: float           # inference latency per mini-batch
    z_bwd: float = 2.0     # backward/forward cost ratio
    n_batch: int = 16      # samples per mini-batch
    m_parallel: int = 1    # parallel inference engines

    def __post_init__(self):
        if min(self.t_pre, self.d_post) < 0 or self.i_inf <= 0:
            raise ConfigurationError("stage timings must be non-negative, "
                                     "inference positive")
        if self.z_bwd < 0:
            raise ConfigurationError("z_bwd must be non-negative")
        if self.n_batch < 1 or self.m_parallel < 1:
            raise ConfigurationError("n_batch and m_parallel must be >= 1")
        if self.m_parallel > self.n_batch:
            raise ConfigurationError("cannot have more engines than samples")


def required_parallelism(t_pre: float, d_post: float, i_inf: float) -> int:
    """Engines needed to keep up when inference dominates the other stages."""
    bottleneck = max(t_pre, d_post)
    if bottleneck <= 0 or i_inf <= bottleneck:
        return 1
    return math.ceil(i_inf / bottleneck)


def backprop_delay(z_bwd: float, i_inf: float, m_parallel: int,
                   n_batch: int) -> float:
    """Amortized per-mini-batch training cost b_d."""
    if n_batch < 1:
        raise ConfigurationError("n_batch must be >= 1")
    return z_bwd * i_inf * m_parallel / n_batch


@dataclass(frozen=True)
class UpdatePolicy:
    regime: TimingRegime
    cadence: int            # update every cadence-th mini-batch
    fallback: bool          # True when timings fit no analyzed regime
    b_d: float

    def __post_init__(self):
        if self.cadence < 1:
            raise ConfigurationError("cadence must be >= 1")


def classify_case(dp: DelayParams) -> UpdatePolicy:
    """Map stage timings to an update cadence; see the module docstring."""
    b_d = backprop_delay(dp.z_bwd, dp.i_inf, dp.m_parallel, dp.n_batch)
    bottleneck = max(dp.t_pre, dp.d_post)
    if bottleneck >= dp.i_inf + b_d:
        return UpdatePolicy(TimingRegime.SLACK, 1, False, b_d)
    if bottleneck < dp.i_inf:
        if dp.n_batch == dp.m_parallel:
            return UpdatePolicy(TimingRegime.SATURATED, 3, False, b_d)
        if dp.n_batch >= dp.z_bwd * dp.m_parallel:
            k = math.ceil(1.0 + dp.z_bwd * dp.m_parallel / dp.n_batch)
            return UpdatePolicy(TimingRegime.BUFFERED, k, False, b_d)
    # uncovered territory: bottleneck within [i_inf, i_inf + b_d), or
    # batch too small to absorb the backward work but not fully saturated
    return UpdatePolicy(TimingRegime.SATURATED, 3, True, b_d)
