"""From-scratch neural stack: conv primitives, the gated residual grid
network, masked BCE loss, Adam, and checkpoint serialization."""
from .ops import conv2d, conv2d_backward, relu, relu_backward
from .loss import masked_bce_loss, masked_bce_with_grad
from .model import (
    ConvParams,
    ForwardCache,
    ModelParams,
    NetConfig,
    ParamsView,
    clone_params,
    copy_into,
    init_params,
    net_backward,
    net_forward,
)
from .optim import AdamState, adam_step, init_adam
from .checkpoint import load_params, save_params
from .gradcheck import GradCheckReport, gradcheck

__all__ = [
    "AdamState", "ConvParams", "ForwardCache", "GradCheckReport", "ModelParams",
    "NetConfig", "ParamsView", "adam_step", "clone_params", "conv2d",
    "conv2d_backward", "copy_into", "gradcheck", "init_adam", "init_params",
    "load_params", "masked_bce_loss", "masked_bce_with_grad", "net_backward",
    "net_forward", "relu", "relu_backward", "save_params",
]
