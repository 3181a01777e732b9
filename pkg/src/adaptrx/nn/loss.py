"""Masked per-bit binary cross-entropy on LLR outputs.

The network emits one LLR plane per bit with the convention that a
positive LLR favors bit value 1, so the per-bit probability is
sigmoid(llr) and the loss for a labeled bit y is

    bce(llr, y) = softplus(llr) - y * llr

which equals -log sigmoid(llr) for y = 1 and -log(1 - sigmoid(llr)) for
y = 0.  The loss is the mean over the selected bit positions.  The mask
may select whole resource elements (shape matching llrs without the bit
axis) or individual bits (full llrs shape).
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import InvalidArgument


def _bit_mask(llrs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape == llrs.shape:
        return mask
    if mask.shape == llrs.shape[:-1]:
        return np.broadcast_to(mask[..., None], llrs.shape)
    raise InvalidArgument(
        f"mask shape {mask.shape} matches neither element grid "
        f"{llrs.shape[:-1]} nor bit grid {llrs.shape}")


def masked_bce_loss(llrs: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Mean binary cross-entropy over the masked bit positions."""
    loss, _ = masked_bce_with_grad(llrs, labels, mask, want_grad=False)
    return loss


def masked_bce_with_grad(llrs: np.ndarray, labels: np.ndarray, mask: np.ndarray,
                         want_grad: bool = True):
    """Loss and its gradient with respect to the LLR array.

    The gradient is zero outside the mask and (sigmoid(llr) - y) / n at
    the n selected bits, matching the mean reduction.
    """
    llrs = np.asarray(llrs)
    labels = np.asarray(labels)
    if labels.shape != llrs.shape:
        raise InvalidArgument(
            f"labels shape {labels.shape} does not match llrs {llrs.shape}")
    bmask = _bit_mask(llrs, mask)
    n = int(bmask.sum())
    if n == 0:
        raise InvalidArgument("loss mask selects no bit positions")
    x = llrs[bmask].astype(np.float64)
    y = labels[bmask].astype(np.float64)
    loss = float(np.mean(np.logaddexp(0.0, x) - x * y))
    if not want_grad:
        return loss, None
    grad = np.zeros_like(llrs)
    grad[bmask] = ((expit(x) - y) / n).astype(llrs.dtype)
    return loss, grad
