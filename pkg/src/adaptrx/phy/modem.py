"""Square QAM mapping, hard demapping, and max-log LLR computation.

Labeling convention (documented once, used everywhere): a symbol index
packs the bits MSB-first with the in-phase half first.  Each axis uses a
reflected Gray code with all-zero bits on the most positive amplitude,
so for QPSK the bits 00 map to (+1+1j)/sqrt(2) and neighboring
amplitudes always differ in exactly one bit.  Constellations are scaled
to unit average energy (1/sqrt(2), 1/sqrt(10), 1/sqrt(42) for orders
4, 16, 64).

LLR convention: positive LLR favors bit value 1.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import InvalidArgument

SUPPORTED_ORDERS = (4, 16, 64)


def bits_per_symbol(q: int) -> int:
    if q not in SUPPORTED_ORDERS:
        raise InvalidArgument(f"modulation order {q} not in {SUPPORTED_ORDERS}")
    return int(np.log2(q))


@lru_cache(maxsize=None)
def _axis_levels(k: int) -> np.ndarray:
    """Amplitude level for each k-bit axis label (unnormalized odd ints)."""
    n = 1 << k
    j = np.arange(n)
    gray = j ^ (j >> 1)
    levels = np.empty(n)
    # ascending amplitude 2j-(n-1) carries the Gray label of the reversed
    # index, which puts label 0 on the most positive amplitude
    levels[gray[::-1]] = 2 * j - (n - 1)
    return levels


@lru_cache(maxsize=None)
def constellation(q: int) -> np.ndarray:
    """Complex points indexed by symbol index, unit average energy."""
    m = bits_per_symbol(q)
    k = m // 2
    levels = _axis_levels(k)
    scale = np.sqrt(2.0 * (q - 1) / 3.0)
    idx = np.arange(q)
    i_label = idx >> k
    q_label = idx & ((1 << k) - 1)
    pts = (levels[i_label] + 1j * levels[q_label]) / scale
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=None)
def _bit_table(q: int) -> np.ndarray:
    """(q, m) array of the bits of each symbol index, MSB first."""
    m = bits_per_symbol(q)
    idx = np.arange(q)
    table = ((idx[:, None] >> (m - 1 - np.arange(m))[None, :]) & 1).astype(np.uint8)
    table.setflags(write=False)
    return table


def bits_to_indices(bits: np.ndarray, q: int) -> np.ndarray:
    m = bits_per_symbol(q)
    bits = np.asarray(bits)
    if bits.size % m:
        raise InvalidArgument(
            f"bit count {bits.size} is not a multiple of {m} bits/symbol")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise InvalidArgument("bits must be 0 or 1")
    groups = bits.reshape(-1, m).astype(np.int64)
    weights = 1 << (m - 1 - np.arange(m))
    return groups @ weights


def indices_to_bits(indices: np.ndarray, q: int) -> np.ndarray:
    return _bit_table(q)[np.asarray(indices)].reshape(-1)


def qam_map(bits: np.ndarray, q: int) -> np.ndarray:
    """Map a flat 0/1 array (multiple of log2(q) long) to complex symbols."""
    return constellation(q)[bits_to_indices(bits, q)]


def index_map(indices: np.ndarray, q: int) -> np.ndarray:
    """Map symbol indices to complex constellation points."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= q):
        raise InvalidArgument(f"symbol index out of range for order {q}")
    return constellation(q)[indices]


def hard_demap(symbols: np.ndarray, q: int) -> np.ndarray:
    """Nearest-point demapping back to a flat bit array."""
    symbols = np.asarray(symbols).ravel()
    pts = constellation(q)
    idx = np.abs(symbols[:, None] - pts[None, :]).argmin(axis=1)
    return indices_to_bits(idx, q)


def maxlog_llr(s_hat: np.ndarray, post_snr: np.ndarray, q: int) -> np.ndarray:
    """Max-log LLRs from equalized symbols and post-equalization SNR.

    llr_b = snr * (min_{x: bit_b(x)=0} |s-x|^2 - min_{x: bit_b(x)=1} |s-x|^2)

    so a positive value favors bit 1.  Exact ties produce 0 even when
    the SNR is infinite (erased or noiseless elements).
    """
    s_hat = np.asarray(s_hat)
    post_snr = np.asarray(post_snr)
    if post_snr.shape != s_hat.shape:
        raise InvalidArgument(
            f"snr shape {post_snr.shape} does not match symbols {s_hat.shape}")
    m = bits_per_symbol(q)
    pts = constellation(q)
    bit_is_one = _bit_table(q).astype(bool)  # (q, m)
    d2 = np.abs(s_hat[..., None] - pts) ** 2  # (..., q)
    llrs = np.empty(s_hat.shape + (m,))
    inf = np.inf
    for b in range(m):
        ones = bit_is_one[:, b]
        d0 = np.where(ones, inf, d2).min(axis=-1)
        d1 = np.where(ones, d2, inf).min(axis=-1)
        diff = d0 - d1
        llrs[..., b] = np.where(diff == 0.0, 0.0, post_snr * diff)
    return llrs
