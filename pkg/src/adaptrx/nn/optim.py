"""Adam optimizer over ModelParams layer tuples."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .model import ConvParams, ModelParams, _frozen


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter.

    Moment arrays are owned by the state and updated in place; parameter
    arrays are replaced functionally so concurrent readers of the params
    container keep a consistent view.
    """
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[ConvParams] = field(default_factory=list)
    v: list[ConvParams] = field(default_factory=list)


def init_adam(params: ModelParams, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    m = [ConvParams(np.zeros_like(l.w), np.zeros_like(l.b)) for l in params.layers]
    v = [ConvParams(np.zeros_like(l.w), np.zeros_like(l.b)) for l in params.layers]
    return AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=0, m=m, v=v)


def adam_step(params: ModelParams, grads, state: AdamState) -> int:
    """One Adam update; mutates state in place and atomically swaps the
    new parameter arrays into params.  Returns the new version."""
    layers = params.layers
    if len(grads) != len(layers) or len(state.m) != len(layers):
        raise ConfigurationError("gradient/state structure does not match params")
    for g, l in zip(grads, layers):
        if g.w.shape != l.w.shape or g.b.shape != l.b.shape:
            raise ConfigurationError(
                f"gradient shape {g.w.shape}/{g.b.shape} does not match "
                f"layer {l.w.shape}/{l.b.shape}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    new_layers = []
    for layer, grad, m, v in zip(layers, grads, state.m, state.v):
        new_wb = []
        for cur, g, mm, vv in ((layer.w, grad.w, m.w, v.w),
                               (layer.b, grad.b, m.b, v.b)):
            g = g.astype(cur.dtype, copy=False)
            mm *= b1
            mm += (1.0 - b1) * g
            vv *= b2
            vv += (1.0 - b2) * np.square(g)
            step = (state.lr * (mm / bc1) / (np.sqrt(vv / bc2) + state.eps))
            new_wb.append(_frozen((cur - step).astype(cur.dtype)))
        new_layers.append(ConvParams(*new_wb))
    return params.replace(new_layers)
