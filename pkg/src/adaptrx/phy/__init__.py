"""Physical layer: grid/link config, QAM modem, TDL fading, classical
estimation and equalization, and error metrics."""
from .channel import (
    LinkConfig,
    TdlProfile,
    apply_channel,
    draw_channel,
    exponential_profile,
    freq_correlation,
    rms_delay_spread,
)
from .modem import (
    SUPPORTED_ORDERS,
    bits_per_symbol,
    constellation,
    hard_demap,
    index_map,
    indices_to_bits,
    bits_to_indices,
    maxlog_llr,
    qam_map,
)
from .baseline import interpolate, lmmse_equalize, ls_estimate
from .metrics import ber, windowed_mean

__all__ = [
    "LinkConfig", "SUPPORTED_ORDERS", "TdlProfile", "apply_channel", "ber",
    "bits_per_symbol", "bits_to_indices", "constellation", "draw_channel",
    "exponential_profile", "freq_correlation", "hard_demap", "index_map",
    "indices_to_bits", "interpolate", "lmmse_equalize", "ls_estimate",
    "maxlog_llr", "qam_map", "rms_delay_spread", "windowed_mean",
]
