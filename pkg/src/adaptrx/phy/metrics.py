"""Bit error accounting."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument


def ber(estimated: np.ndarray, reference: np.ndarray) -> float:
    """Exact bit error fraction between two equal-length 0/1 arrays."""
    estimated = np.asarray(estimated).ravel()
    reference = np.asarray(reference).ravel()
    if estimated.size != reference.size:
        raise InvalidArgument(
            f"bit arrays differ in length: {estimated.size} vs {reference.size}")
    if estimated.size == 0:
        raise InvalidArgument("cannot compute BER of zero bits")
    return float(np.count_nonzero(estimated != reference) / estimated.size)


def windowed_mean(series: np.ndarray, window: int) -> np.ndarray:
    """Means over consecutive non-overlapping windows; the tail remainder
    shorter than one window is dropped."""
    if window < 1:
        raise InvalidArgument("window must be >= 1")
    series = np.asarray(series, dtype=np.float64)
    n = series.size // window
    if n == 0:
        return np.empty(0)
    return series[:n * window].reshape(n, window).mean(axis=1)
