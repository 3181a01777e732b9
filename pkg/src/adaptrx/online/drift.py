"""Channel statistics drift over a run.

The tracked quantity is the lower edge tau_bar of the per-frame delay
spread window: each frame draws tau uniformly from
[tau_bar, tau_bar + span].  Three schedule variants move tau_bar:

* step_slow / step_fast: tau_bar jumps by a fixed step at a fixed period
  (they differ only in their default period),
* random_walk: jump sizes are uniform on [walk_step_lo, walk_step_hi]
  at intervals uniform on [walk_interval_lo, walk_interval_hi] samples,
  and the walk keeps its direction with probability `persistence`.

tau_bar reflects off [tau_min, tau_max].  All schedules are measured in
samples (frames); event boundaries land exactly on sample counts, so a
period of 16000 samples with 16-frame mini-batches changes tau_bar
exactly at mini-batch indices 1000, 2000, ...
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..rng import stream

STEP_SLOW = "step_slow"
STEP_FAST = "step_fast"
RANDOM_WALK = "random_walk"
VARIANTS = (STEP_SLOW, STEP_FAST, RANDOM_WALK)

NS = 1e-9


@dataclass(frozen=True)
class DriftSchedule:
    variant: str = STEP_SLOW
    step_ns: float = 20.0
    period_samples: int = 16000          # step variants
    walk_step_lo_ns: float = 0.0         # random walk
    walk_step_hi_ns: float = 40.0
    walk_interval_lo: int = 160
    walk_interval_hi: int = 2400
    persistence: float = 0.8
    tau_start_ns: float = 40.0
    tau_min_ns: float = 40.0
    tau_max_ns: float = 400.0
    span_ns: float = 10.0                # per-frame window width

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown drift variant {self.variant!r}")
        if self.period_samples < 1:
            raise ConfigurationError("period_samples must be >= 1")
        if not (0 < self.walk_interval_lo <= self.walk_interval_hi):
            raise ConfigurationError("walk interval bounds must be positive "
                                     "and ordered")
        if not (0 <= self.walk_step_lo_ns <= self.walk_step_hi_ns):
            raise ConfigurationError("walk step bounds must be ordered")
        if not 0.0 <= self.persistence <= 1.0:
            raise ConfigurationError("persistence must be in [0, 1]")
        if not (0 < self.tau_min_ns <= self.tau_start_ns <= self.tau_max_ns):
            raise ConfigurationError("need 0 < tau_min <= tau_start <= tau_max")
        if self.span_ns < 0:
            raise ConfigurationError("span_ns must be non-negative")

    @classmethod
    def step_slow(cls, batch_size: int = 16, **kw) -> "DriftSchedule":
        """Step every 1000 mini-batches."""
        return cls(variant=STEP_SLOW, period_samples=1000 * batch_size, **kw)

    @classmethod
    def step_fast(cls, **kw) -> "DriftSchedule":
        """Step every 480 samples."""
        return cls(variant=STEP_FAST, period_samples=480, **kw)


def _reflect(value: float, lo: float, hi: float):
    """Fold value into [lo, hi]; returns (folded, flipped)."""
    if hi <= lo:
        return lo, False
    flipped = False
    while value > hi or value < lo:
        if value > hi:
            value = 2 * hi - value
        else:
            value = 2 * lo - value
        flipped = not flipped
    return value, flipped


class DriftTracker:
    """Stateful walker over a DriftSchedule, deterministic in its seed."""

    def __init__(self, schedule: DriftSchedule, seed: int):
        self.schedule = schedule
        self._rng = stream(seed, "drift")
        self.tau_bar_ns = schedule.tau_start_ns
        self._direction = 1.0
        self._samples = 0
        if schedule.variant == RANDOM_WALK:
            self._next_event = self._draw_interval()
        else:
            self._next_event = schedule.period_samples

    def _draw_interval(self) -> int:
        s = self.schedule
        return self._samples + int(self._rng.integers(s.walk_interval_lo,
                                                      s.walk_interval_hi + 1))

    def _fire(self) -> None:
        s = self.schedule
        if s.variant == RANDOM_WALK:
            step = float(self._rng.uniform(s.walk_step_lo_ns, s.walk_step_hi_ns))
            if float(self._rng.random()) > s.persistence:
                self._direction = -self._direction
            self._next_event = self._draw_interval()
        else:
            step = s.step_ns
            self._next_event += s.period_samples
        value = self.tau_bar_ns + self._direction * step
        value, flipped = _reflect(value, s.tau_min_ns, s.tau_max_ns)
        if flipped:
            self._direction = -self._direction
        self.tau_bar_ns = value

    def advance(self, n_samples: int) -> float:
        """Account for n_samples more frames; returns the new tau_bar_ns."""
        target = self._samples + int(n_samples)
        while self._next_event <= target:
            self._samples = self._next_event
            self._fire()
        self._samples = target
        return self.tau_bar_ns

    def window_s(self) -> tuple[float, float]:
        """Current per-frame delay spread window in seconds."""
        lo = self.tau_bar_ns * NS
        return lo, lo + self.schedule.span_ns * NS
