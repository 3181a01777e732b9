"""First-moment/second-moment adaptive updates against a scalar reference."""

from __future__ import annotations

import math

import numpy as np
import pytest

from adaptrx.nn.model import ConvParams, NetConfig, init_params
from adaptrx.nn.optim import adam_step, init_adam


def _scalar_reference(grads, lr, beta1, beta2, eps):
    """Independent scalar run of the update rule; returns cumulative deltas."""
    m = v = 0.0
    w = 0.0
    deltas = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mhat = m / (1 - beta1**t)
        vhat = v / (1 - beta2**t)
        w -= lr * mhat / (math.sqrt(vhat) + eps)
        deltas.append(w)
    return deltas


def _constant_grads(params, value):
    return tuple(ConvParams(np.full_like(l.w, value), np.full_like(l.b, value))
                 for l in params.layers)


def test_updates_match_scalar_reference():
    cfg = NetConfig(in_channels=2, out_bits=1, width=3, blocks=1)
    params = init_params(cfg, seed=5)
    start = [l.w.copy() for l in params.layers]
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    state = init_adam(params, lr=lr, beta1=b1, beta2=b2, eps=eps)
    gseq = [0.3, -0.1, 0.25]
    expected = _scalar_reference(gseq, lr, b1, b2, eps)
    for step, g in enumerate(gseq):
        version = adam_step(params, _constant_grads(params, g), state)
        assert version == step + 1
        for w0, layer in zip(start, params.layers):
            np.testing.assert_allclose(layer.w - w0, expected[step],
                                       rtol=0, atol=2e-6)


def test_zero_lr_leaves_values_but_bumps_version():
    cfg = NetConfig(in_channels=2, out_bits=1, width=3, blocks=1)
    params = init_params(cfg, seed=6)
    before = [l.w.copy() for l in params.layers]
    state = init_adam(params, lr=0.0)
    adam_step(params, _constant_grads(params, 1.0), state)
    assert params.version == 1
    for w0, layer in zip(before, params.layers):
        np.testing.assert_array_equal(layer.w, w0)


def test_step_counter_advances():
    cfg = NetConfig(in_channels=2, out_bits=1, width=3, blocks=1)
    params = init_params(cfg, seed=7)
    state = init_adam(params, lr=1e-3)
    assert state.t == 0
    adam_step(params, _constant_grads(params, 0.5), state)
    adam_step(params, _constant_grads(params, 0.5), state)
    assert state.t == 2


def test_descends_a_quadratic():
    """Gradient of 0.5*(w - target)^2 drives every weight toward the target."""
    cfg = NetConfig(in_channels=2, out_bits=1, width=3, blocks=1)
    params = init_params(cfg, seed=8)
    target = 0.7
    state = init_adam(params, lr=0.05)
    for _ in range(200):
        grads = tuple(ConvParams(l.w - target, l.b - target)
                      for l in params.layers)
        adam_step(params, grads, state)
    for layer in params.layers:
        np.testing.assert_allclose(layer.w, target, atol=0.05)
        np.testing.assert_allclose(layer.b, target, atol=0.05)
