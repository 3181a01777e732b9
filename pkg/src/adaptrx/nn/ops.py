"""Convolution and activation primitives on (batch, rows, cols, channels) arrays.

All convolutions use odd kernels with "same" zero padding, stride 1.
Forward maps are pure functions; the backward functions are their exact
adjoints up to floating point.  The patch matrix is rebuilt on the
backward pass instead of cached (nine strided copies are cheaper than
holding the expanded matrix alive).
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, NumericFault


def _patches(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Gather zero-padded kh x kw neighborhoods: (B,H,W,C) -> (B,H,W,kh*kw*C)."""
    b, h, w, c = x.shape
    ph, pw = kh // 2, kw // 2
    xp = np.zeros((b, h + 2 * ph, w + 2 * pw, c), dtype=x.dtype)
    xp[:, ph:ph + h, pw:pw + w, :] = x
    out = np.empty((b, h, w, kh * kw * c), dtype=x.dtype)
    k = 0
    for i in range(kh):
        for j in range(kw):
            out[..., k * c:(k + 1) * c] = xp[:, i:i + h, j:j + w, :]
            k += 1
    return out


def _check_conv_shapes(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> None:
    if x.ndim != 4:
        raise ConfigurationError(f"conv input must be 4-d, got shape {x.shape}")
    if w.ndim != 4:
        raise ConfigurationError(f"conv kernel must be 4-d, got shape {w.shape}")
    kh, kw, cin, cout = w.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ConfigurationError(f"kernel dims must be odd, got {kh}x{kw}")
    if x.shape[3] != cin:
        raise ConfigurationError(
            f"input channels {x.shape[3]} do not match kernel fan-in {cin}")
    if b.shape != (cout,):
        raise ConfigurationError(
            f"bias shape {b.shape} does not match kernel fan-out {cout}")


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-padded stride-1 convolution, (B,H,W,Cin) -> (B,H,W,Cout)."""
    _check_conv_shapes(x, w, b)
    kh, kw, cin, cout = w.shape
    cols = _patches(x, kh, kw)
    y = cols.reshape(-1, kh * kw * cin) @ w.reshape(-1, cout)
    y += b
    return y.reshape(x.shape[:3] + (cout,))


def conv2d_backward(x: np.ndarray, w: np.ndarray, dout: np.ndarray):
    """Adjoint of conv2d at input x.  Returns (dx, dw, db)."""
    kh, kw, cin, cout = w.shape
    _check_conv_shapes(x, w, np.zeros(cout, dtype=x.dtype))
    bsz, h, wd, _ = x.shape
    if dout.shape != (bsz, h, wd, cout):
        raise ConfigurationError(
            f"upstream gradient shape {dout.shape} does not match output "
            f"{(bsz, h, wd, cout)}")
    cols = _patches(x, kh, kw).reshape(-1, kh * kw * cin)
    dflat = dout.reshape(-1, cout)
    dw = (cols.T @ dflat).reshape(w.shape)
    db = dflat.sum(axis=0)
    dcols = (dflat @ w.reshape(-1, cout).T).reshape(bsz, h, wd, kh * kw * cin)
    ph, pw = kh // 2, kw // 2
    dxp = np.zeros((bsz, h + 2 * ph, wd + 2 * pw, cin), dtype=x.dtype)
    k = 0
    for i in range(kh):
        for j in range(kw):
            dxp[:, i:i + h, j:j + wd, :] += dcols[..., k * cin:(k + 1) * cin]
            k += 1
    dx = dxp[:, ph:ph + h, pw:pw + wd, :]
    return dx, dw, db


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(pre: np.ndarray, dout: np.ndarray) -> np.ndarray:
    """Gradient through relu given the pre-activation values."""
    return dout * (pre > 0)


def check_finite(name: str, arr: np.ndarray) -> None:
    """Raise NumericFault naming the producing layer if arr has inf/nan."""
    if not np.isfinite(arr).all():
        raise NumericFault(f"non-finite values after {name}")
