"""Frame and mini-batch synthesis.

All randomness derives from (seed, batch_index, frame_index, purpose)
streams, so two receivers evaluated against the same seed see exactly
the same channels, noise, payloads, plans, and masks.  One plan and one
mask are shared by all frames of a mini-batch; channels, noise, and
payload bits are drawn per frame.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phy import LinkConfig, apply_channel, bits_per_symbol, draw_channel, \
    exponential_profile, qam_map
from .pilots import PilotDesign, PilotPlan, embed, make_plan, select_mask
from .rng import stream


@dataclass(frozen=True, eq=False)
class Frame:
    """One transmitted/received frame with its ground truth."""
    tau_s: float
    tx_bits: np.ndarray     # flat data payload bits in embed order
    h: np.ndarray           # (T, F, K) true channel
    rx: np.ndarray          # (T, F, K) received grid


@dataclass(frozen=True, eq=False)
class FrameBatch:
    """A mini-batch sharing one pilot plan and one mask."""
    batch_index: int
    plan: PilotPlan
    mask: np.ndarray
    frames: tuple[Frame, ...]

    @property
    def size(self) -> int:
        return len(self.frames)


def n_data_bits(cfg: LinkConfig, plan: PilotPlan) -> int:
    return (cfg.grid_size - plan.n_pilots) * bits_per_symbol(cfg.mod_order)


def simulate_frame(cfg: LinkConfig, plan: PilotPlan, tau_s: float, seed: int,
                   batch_index: int, frame_index: int, taps: int = 8,
                   decay_db: float = 20.0) -> Frame:
    """Draw payload, channel, and noise for one frame."""
    bits_rng = stream(seed, "bits", batch_index, frame_index)
    chan_rng = stream(seed, "chan", batch_index, frame_index)
    noise_rng = stream(seed, "noise", batch_index, frame_index)
    nbits = n_data_bits(cfg, plan)
    bits = bits_rng.integers(0, 2, size=nbits).astype(np.uint8)
    grid = embed(plan, qam_map(bits, cfg.mod_order))
    profile = exponential_profile(tau_s, taps=taps, decay_db=decay_db)
    h = draw_channel(profile, cfg, chan_rng)
    rx = apply_channel(grid, h, cfg.noise_variance, noise_rng)
    return Frame(tau_s=tau_s, tx_bits=bits, h=h, rx=rx)


def draw_taus(cfg_seed: int, batch_index: int, lo_s: float, hi_s: float,
              count: int) -> np.ndarray:
    """Per-frame delay spreads, uniform over [lo_s, hi_s]."""
    rng = stream(cfg_seed, "tau", batch_index)
    return rng.uniform(lo_s, hi_s, size=count)


def make_batch(cfg: LinkConfig, design: PilotDesign, mask_fraction: float,
               taus_s: np.ndarray, seed: int, batch_index: int, taps: int = 8,
               decay_db: float = 20.0) -> FrameBatch:
    """Synthesize one mini-batch of len(taus_s) frames."""
    plan = make_plan(design, cfg, seed, batch_index)
    mask = select_mask(plan, mask_fraction, seed)
    frames = tuple(
        simulate_frame(cfg, plan, float(tau), seed, batch_index, i,
                       taps=taps, decay_db=decay_db)
        for i, tau in enumerate(taus_s))
    return FrameBatch(batch_index=batch_index, plan=plan, mask=mask,
                      frames=frames)
