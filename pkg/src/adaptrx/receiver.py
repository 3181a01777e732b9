"""Frame detection front-ends: neural and classical.

Both return a DetectionResult whose data_bits line up exactly with the
transmitted data bits in embed order, so BER is a direct comparison.
Pilot positions, masked or not, never contribute data bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .nn import ModelParams, NetConfig, net_forward
from .phy import bits_per_symbol, interpolate, lmmse_equalize, ls_estimate, maxlog_llr
from .pilots import PilotPlan, build_input


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Per-frame detector output."""
    llr_grid: np.ndarray        # (T, F, m)
    data_positions: np.ndarray  # flat row-major indices of data elements
    data_bits: np.ndarray       # hard bits at data positions, embed order


def hard_bits(llrs: np.ndarray) -> np.ndarray:
    """Positive LLR decides bit 1; zero (erasure/tie) decides bit 0."""
    return (np.asarray(llrs) > 0).astype(np.uint8)


def result_from_llrs(llr_grid: np.ndarray, plan: PilotPlan) -> DetectionResult:
    t_dim, f_dim = plan.shape
    m = llr_grid.shape[-1]
    pos = plan.data_positions()
    data_llrs = llr_grid.reshape(t_dim * f_dim, m)[pos]
    return DetectionResult(llr_grid=llr_grid, data_positions=pos,
                           data_bits=hard_bits(data_llrs).ravel())


def neural_detect(params: ModelParams, cfg: NetConfig, rx_grid: np.ndarray,
                  plan: PilotPlan, noise_var: float,
                  mask: np.ndarray | None = None) -> DetectionResult:
    """Single-frame detection with the network.

    mask hides that subset of pilots from the input's pilot plane (the
    network then treats them like data); pass None to expose all pilots.
    """
    x = build_input(rx_grid, plan, noise_var, mask)[None]
    llrs, _ = net_forward(params, cfg, x, want_cache=False)
    return result_from_llrs(np.asarray(llrs[0], dtype=np.float64), plan)


def lmmse_detect(rx_grid: np.ndarray, plan: PilotPlan, noise_var: float,
                 h: np.ndarray | None = None,
                 mask: np.ndarray | None = None) -> DetectionResult:
    """Classical detection: LS + interpolation (or true h), MMSE combining,
    max-log LLRs.

    With h given the estimator is bypassed (perfect CSI).  Otherwise LS
    runs on the pilots visible after masking; if none are usable every
    element is erased (all-zero LLRs).
    """
    t_dim, f_dim = plan.shape
    m = bits_per_symbol(plan.mod_order)
    if h is None:
        visible = np.ones(plan.n_pilots, dtype=bool)
        if mask is not None:
            visible = ~np.asarray(mask, dtype=bool).ravel()[plan.positions]
        try:
            pos, est = ls_estimate(rx_grid, plan.positions[visible],
                                   plan.symbols[visible])
            h_hat = interpolate(pos, est, t_dim, f_dim)
        except EstimationError:
            return result_from_llrs(np.zeros((t_dim, f_dim, m)), plan)
    else:
        h_hat = h
    s_hat, post_snr = lmmse_equalize(rx_grid, h_hat, noise_var)
    llrs = maxlog_llr(s_hat, post_snr, plan.mod_order)
    return result_from_llrs(llrs, plan)
