"""Tapped-delay-line fading over an OFDM resource grid.

Each receive antenna sees an independent realization of the same power
delay profile.  Taps are i.i.d. circular complex Gaussians with
variances equal to the profile powers, so the frequency response

    H[f] = sum_p a_p * exp(-2j pi f df tau_p)

has unit average power.  Fading is block-constant over the frame's
symbols (quasi-static within a slot) and independent frame to frame.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, InvalidArgument
from ..rng import stream


@dataclass(frozen=True)
class LinkConfig:
    """Static dimensions and operating point of the simulated link."""
    symbols: int = 14          # OFDM symbols per frame (time)
    subcarriers: int = 64      # subcarriers per frame (frequency)
    antennas: int = 2          # receive antennas
    mod_order: int = 64        # QAM order
    spacing_hz: float = 15e3   # subcarrier spacing
    snr_db: float = 20.0       # per-antenna SNR for unit-energy symbols
    noise_var: float | None = None  # overrides snr_db when set

    def __post_init__(self):
        if min(self.symbols, self.subcarriers, self.antennas) < 1:
            raise ConfigurationError("grid dimensions must be positive")
        from .modem import SUPPORTED_ORDERS
        if self.mod_order not in SUPPORTED_ORDERS:
            raise ConfigurationError(
                f"mod_order {self.mod_order} not in {SUPPORTED_ORDERS}")
        if self.spacing_hz <= 0:
            raise ConfigurationError("spacing_hz must be positive")
        if self.noise_var is not None and self.noise_var <= 0:
            raise ConfigurationError("noise_var must be positive")

    @property
    def noise_variance(self) -> float:
        if self.noise_var is not None:
            return self.noise_var
        return float(10.0 ** (-self.snr_db / 10.0))

    @property
    def grid_size(self) -> int:
        return self.symbols * self.subcarriers


def rms_delay_spread(delays: np.ndarray, powers: np.ndarray) -> float:
    """Root second central moment of a normalized power delay profile."""
    delays = np.asarray(delays, dtype=np.float64)
    powers = np.asarray(powers, dtype=np.float64)
    mean = float(powers @ delays)
    second = float(powers @ (delays ** 2))
    return float(np.sqrt(max(second - mean * mean, 0.0)))


@dataclass(frozen=True, eq=False)
class TdlProfile:
    """Normalized power delay profile with a pinned RMS delay spread."""
    delays_s: np.ndarray
    powers: np.ndarray
    rms_s: float

    def __post_init__(self):
        delays = np.asarray(self.delays_s, dtype=np.float64)
        powers = np.asarray(self.powers, dtype=np.float64)
        if delays.ndim != 1 or delays.shape != powers.shape or delays.size < 1:
            raise ConfigurationError("delays and powers must be matching 1-d arrays")
        if delays.size > 1 and not (np.diff(delays) > 0).all():
            raise ConfigurationError("tap delays must be strictly increasing")
        if (powers <= 0).any():
            raise ConfigurationError("tap powers must be positive")
        if abs(powers.sum() - 1.0) > 1e-9:
            raise ConfigurationError("tap powers must sum to one")
        got = rms_delay_spread(delays, powers)
        tol = 1e-12 * max(self.rms_s, 1e-30)
        if abs(got - self.rms_s) > tol:
            raise ConfigurationError(
                f"profile RMS delay spread {got} does not match target "
                f"{self.rms_s}")
        delays.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "delays_s", delays)
        object.__setattr__(self, "powers", powers)

    @property
    def taps(self) -> int:
        return self.delays_s.size


def exponential_profile(rms_s: float, taps: int = 8,
                        decay_db: float = 20.0) -> TdlProfile:
    """Uniformly spaced exponential profile rescaled to an exact RMS spread.

    Tap powers fall off linearly in dB across the taps (decay_db total);
    the tap spacing is then solved so the RMS delay spread equals rms_s
    exactly (the spread is homogeneous of degree one in the spacing).
    """
    if taps < 1:
        raise InvalidArgument("taps must be >= 1")
    if taps == 1:
        if rms_s != 0.0:
            raise InvalidArgument("a single tap has zero delay spread")
        return TdlProfile(np.zeros(1), np.ones(1), 0.0)
    if rms_s <= 0:
        raise InvalidArgument("rms_s must be positive for a multi-tap profile")
    p = np.arange(taps, dtype=np.float64)
    powers = 10.0 ** (-decay_db * p / (10.0 * (taps - 1)))
    powers /= powers.sum()
    unit_rms = rms_delay_spread(p, powers)
    spacing = rms_s / unit_rms
    return TdlProfile(p * spacing, powers, rms_s)


def freq_correlation(profile: TdlProfile, delta_hz: np.ndarray) -> np.ndarray:
    """Analytic E[H[f] H*(f + delta)] for subcarrier offsets in Hz."""
    delta_hz = np.asarray(delta_hz, dtype=np.float64)
    phase = np.exp(2j * np.pi * delta_hz[..., None] * profile.delays_s)
    return phase @ profile.powers


def draw_channel(profile: TdlProfile, cfg: LinkConfig, rng) -> np.ndarray:
    """One block-fading realization, shape (T, F, K) complex."""
    if isinstance(rng, (int, np.integer)):
        rng = stream(int(rng), "chan")
    p, k = profile.taps, cfg.antennas
    scale = np.sqrt(profile.powers / 2.0)
    gains = scale[:, None] * (rng.standard_normal((p, k))
                              + 1j * rng.standard_normal((p, k)))
    f = np.arange(cfg.subcarriers)[:, None] * cfg.spacing_hz
    phases = np.exp(-2j * np.pi * f * profile.delays_s[None, :])  # (F, P)
    hf = phases @ gains  # (F, K)
    return np.broadcast_to(hf[None, :, :], (cfg.symbols,) + hf.shape).copy()


def apply_channel(tx_grid: np.ndarray, h: np.ndarray, noise_var: float,
                  rng) -> np.ndarray:
    """Per-element channel: y = h * s + w with w ~ CN(0, noise_var)."""
    tx_grid = np.asarray(tx_grid)
    if h.shape[:2] != tx_grid.shape:
        raise InvalidArgument(
            f"channel shape {h.shape} does not match grid {tx_grid.shape}")
    if noise_var < 0:
        raise InvalidArgument("noise_var must be non-negative")
    y = h * tx_grid[..., None]
    if noise_var > 0:
        if isinstance(rng, (int, np.integer)):
            rng = stream(int(rng), "noise")
        w = np.sqrt(noise_var / 2.0) * (rng.standard_normal(h.shape)
                                        + 1j * rng.standard_normal(h.shape))
        y = y + w
    return y
