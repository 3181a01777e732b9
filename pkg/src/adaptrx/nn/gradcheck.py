"""Central finite-difference verification of the analytic gradients.

Runs in float64 and perturbs every scalar parameter of a small network,
comparing the analytic gradient against (L(p+eps) - L(p-eps)) / (2 eps).
Relative error uses max(|analytic|, |numeric|, denom_floor) in the
denominator; the floor keeps finite-difference rounding noise on
near-zero gradients from registering as disagreement.  Intended for
configurations of at most a few thousand parameters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .loss import masked_bce_with_grad
from .model import ConvParams, ModelParams, NetConfig, init_params, net_backward, net_forward


@dataclass
class GradCheckReport:
    max_rel_err: float
    per_layer: dict[str, float]
    n_params: int
    eps: float


def _loss_at(layers, cfg: NetConfig, x, labels, mask) -> float:
    params = ModelParams(cfg, layers)
    llrs, _ = net_forward(params, cfg, x, want_cache=False)
    loss, _ = masked_bce_with_grad(llrs, labels, mask, want_grad=False)
    return loss


def gradcheck(cfg: NetConfig, x: np.ndarray, labels: np.ndarray, mask: np.ndarray,
              seed: int = 0, eps: float = 1e-5, denom_floor: float = 1e-4,
              max_params: int = 5000) -> GradCheckReport:
    """Exhaustive finite-difference sweep over all parameters."""
    n_params = cfg.param_count()
    if n_params > max_params:
        raise ConfigurationError(
            f"gradcheck config has {n_params} params, limit {max_params}")

    params = init_params(cfg, seed, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    _, cache = net_forward(params, cfg, x, want_cache=True)
    _, analytic = net_backward(params, cfg, cache, labels, mask)

    specs = cfg.layer_specs()
    base = list(params.layers)
    per_layer: dict[str, float] = {}
    worst = 0.0
    for li, (spec, layer, grad) in enumerate(zip(specs, base, analytic)):
        layer_worst = 0.0
        for arr_name in ("w", "b"):
            arr = getattr(layer, arr_name)
            ga = getattr(grad, arr_name).ravel()
            for idx in range(arr.size):
                losses = []
                for sign in (+1.0, -1.0):
                    bumped = arr.copy()
                    bumped.ravel()[idx] += sign * eps
                    trial = list(base)
                    trial[li] = (ConvParams(bumped, layer.b) if arr_name == "w"
                                 else ConvParams(layer.w, bumped))
                    losses.append(_loss_at(trial, cfg, x, labels, mask))
                numeric = (losses[0] - losses[1]) / (2.0 * eps)
                a = float(ga[idx])
                rel = abs(a - numeric) / max(abs(a), abs(numeric), denom_floor)
                layer_worst = max(layer_worst, rel)
        per_layer[spec.name] = layer_worst
        worst = max(worst, layer_worst)
    return GradCheckReport(max_rel_err=worst, per_layer=per_layer,
                           n_params=n_params, eps=eps)
