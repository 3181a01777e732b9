"""Gated residual convolutional network for grid-shaped receiver inputs.

The network runs two interacting stacks of same-padded 3x3 convolutions
over the (time, frequency) grid:

* a main stack whose blocks are residual (conv -> relu -> conv, plus a
  skip connection), and
* a gate stack of the same depth without skips.

After every block the main activation is multiplied element-wise by the
gate activation; the product feeds the next main block while the gate
stack continues from its own output.  The multiplicative interaction
lets the network express quotient-like maps (equalization) that plain
additive stacks approximate poorly.  A final linear convolution maps the
merged activation to one output plane per bit.

Parameters live in ModelParams, which supports lock-free snapshot reads
and atomic whole-set replacement so that a forward pass running
concurrently with a parameter copy always observes exactly one version.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import ConfigurationError, InvalidArgument, InvalidStateError
from ..rng import stream
from .ops import check_finite, conv2d, conv2d_backward, relu, relu_backward
from .loss import masked_bce_with_grad


@dataclass(frozen=True)
class ConvSpec:
    """Shape of one convolution layer."""
    name: str
    kh: int
    kw: int
    cin: int
    cout: int

    @property
    def n_params(self) -> int:
        return self.kh * self.kw * self.cin * self.cout + self.cout


@dataclass(frozen=True)
class NetConfig:
    """Structure of the network.

    out_bits must equal the number of bits per modulated symbol so that
    the output grid carries one LLR plane per bit.
    """
    in_channels: int
    out_bits: int
    width: int = 64
    blocks: int = 4
    kernel: int = 3
    gate_bias_init: float = 1.0
    param_budget: int | None = None

    def __post_init__(self):
        if self.in_channels < 1 or self.out_bits < 1:
            raise ConfigurationError("in_channels and out_bits must be positive")
        if self.width < 1 or self.blocks < 1:
            raise ConfigurationError("width and blocks must be positive")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ConfigurationError(f"kernel must be odd, got {self.kernel}")
        if self.param_budget is not None and self.param_count() > self.param_budget:
            raise ConfigurationError(
                f"parameter count {self.param_count()} exceeds budget "
                f"{self.param_budget}")

    def layer_specs(self) -> tuple[ConvSpec, ...]:
        k, w = self.kernel, self.width
        specs = [
            ConvSpec("main_in", k, k, self.in_channels, w),
            ConvSpec("gate_in", k, k, self.in_channels, w),
        ]
        for i in range(self.blocks):
            specs += [
                ConvSpec(f"b{i}.main1", k, k, w, w),
                ConvSpec(f"b{i}.main2", k, k, w, w),
                ConvSpec(f"b{i}.gate1", k, k, w, w),
                ConvSpec(f"b{i}.gate2", k, k, w, w),
            ]
        specs.append(ConvSpec("out", k, k, w, self.out_bits))
        return tuple(specs)

    def param_count(self) -> int:
        return sum(s.n_params for s in self.layer_specs())


@dataclass(frozen=True, eq=False)
class ConvParams:
    """One layer's weights; arrays are treated as immutable once attached."""
    w: np.ndarray
    b: np.ndarray


class ParamsView(NamedTuple):
    """Immutable snapshot of a parameter set at one version."""
    version: int
    layers: tuple[ConvParams, ...]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class ModelParams:
    """Versioned parameter container with atomic replacement.

    The (version, layers) pair is held in a single attribute, so readers
    that grab it once via snapshot() can never observe a half-replaced
    parameter set.  Every mutation installs freshly allocated read-only
    arrays and bumps the version.
    """

    def __init__(self, cfg: NetConfig, layers, version: int = 0):
        layers = tuple(layers)
        _check_structure(cfg, layers)
        self.cfg = cfg
        self._state = (version, layers)
        self._lock = threading.Lock()

    @property
    def version(self) -> int:
        return self._state[0]

    @property
    def layers(self) -> tuple[ConvParams, ...]:
        return self._state[1]

    def snapshot(self) -> ParamsView:
        version, layers = self._state
        return ParamsView(version, layers)

    def replace(self, layers) -> int:
        """Atomically install a new layer tuple; returns the new version."""
        layers = tuple(layers)
        _check_structure(self.cfg, layers)
        with self._lock:
            version = self._state[0] + 1
            self._state = (version, layers)
        return version


def _check_structure(cfg: NetConfig, layers: tuple[ConvParams, ...]) -> None:
    specs = cfg.layer_specs()
    if len(layers) != len(specs):
        raise ConfigurationError(
            f"expected {len(specs)} layers, got {len(layers)}")
    for spec, layer in zip(specs, layers):
        want_w = (spec.kh, spec.kw, spec.cin, spec.cout)
        if layer.w.shape != want_w or layer.b.shape != (spec.cout,):
            raise ConfigurationError(
                f"layer {spec.name}: expected w{want_w} b({spec.cout},), "
                f"got w{layer.w.shape} b{layer.b.shape}")


def init_params(cfg: NetConfig, seed: int, dtype=np.float32) -> ModelParams:
    """Fan-in-scaled uniform initialization, deterministic in seed.

    Weights are U(-a, a) with a = sqrt(6 / fan_in).  Biases start at
    zero except the closing conv of each gate block, which starts at
    gate_bias_init so the multiplicative merge opens near identity and
    the main stack trains like a plain residual net at step 0.
    """
    rng = stream(seed, "init")
    layers = []
    for spec in cfg.layer_specs():
        fan_in = spec.kh * spec.kw * spec.cin
        bound = math.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(spec.kh, spec.kw, spec.cin, spec.cout))
        b = np.zeros(spec.cout)
        if spec.name.endswith("gate2"):
            b += cfg.gate_bias_init
        layers.append(ConvParams(_frozen(w.astype(dtype)), _frozen(b.astype(dtype))))
    return ModelParams(cfg, layers)


def clone_params(src: ModelParams) -> ModelParams:
    """Independent container sharing the (immutable) current arrays."""
    return ModelParams(src.cfg, src.layers, version=src.version)


def copy_into(dst: ModelParams, src: ModelParams) -> int:
    """Atomically make dst's values equal src's current values.

    Readers holding a snapshot of dst keep their old consistent view;
    new snapshots see the copied set.  Returns dst's new version.
    """
    if dst.cfg != src.cfg:
        raise ConfigurationError("parameter sets have different structures")
    return dst.replace(src.layers)


@dataclass
class BlockCache:
    main_entry: np.ndarray
    m1_pre: np.ndarray
    m1_act: np.ndarray
    main_out: np.ndarray
    gate_entry: np.ndarray
    g1_pre: np.ndarray
    g1_act: np.ndarray
    gate_out: np.ndarray
    merged: np.ndarray


@dataclass
class ForwardCache:
    """Activations needed to run the exact backward pass."""
    version: int
    x: np.ndarray
    blocks: list[BlockCache] = field(default_factory=list)
    llrs: np.ndarray | None = None


def net_forward(params: ModelParams | ParamsView, cfg: NetConfig, x: np.ndarray,
                want_cache: bool = False):
    """Run the network on a (batch, T, F, in_channels) array.

    Returns (llrs, cache) where llrs has shape (batch, T, F, out_bits)
    and cache is None unless want_cache.  Raises NumericFault naming the
    first layer whose output is non-finite.
    """
    view = params.snapshot() if isinstance(params, ModelParams) else params
    layers = view.layers
    x = np.asarray(x, dtype=layers[0].w.dtype)
    if x.ndim != 4 or x.shape[3] != cfg.in_channels:
        raise InvalidArgument(
            f"input shape {x.shape} does not match (B,T,F,{cfg.in_channels})")
    check_finite("input", x)

    specs = cfg.layer_specs()
    by_name = {spec.name: layer for spec, layer in zip(specs, layers)}
    cache = ForwardCache(version=view.version, x=x) if want_cache else None

    main = conv2d(x, by_name["main_in"].w, by_name["main_in"].b)
    check_finite("main_in", main)
    gate = conv2d(x, by_name["gate_in"].w, by_name["gate_in"].b)
    check_finite("gate_in", gate)

    for i in range(cfg.blocks):
        m1 = by_name[f"b{i}.main1"]
        m2 = by_name[f"b{i}.main2"]
        g1 = by_name[f"b{i}.gate1"]
        g2 = by_name[f"b{i}.gate2"]

        m1_pre = conv2d(main, m1.w, m1.b)
        check_finite(f"b{i}.main1", m1_pre)
        m1_act = relu(m1_pre)
        main_out = main + conv2d(m1_act, m2.w, m2.b)
        check_finite(f"b{i}.main2", main_out)

        g1_pre = conv2d(gate, g1.w, g1.b)
        check_finite(f"b{i}.gate1", g1_pre)
        g1_act = relu(g1_pre)
        gate_out = conv2d(g1_act, g2.w, g2.b)
        check_finite(f"b{i}.gate2", gate_out)

        merged = main_out * gate_out
        check_finite(f"b{i}.merge", merged)

        if want_cache:
            cache.blocks.append(BlockCache(
                main_entry=main, m1_pre=m1_pre, m1_act=m1_act, main_out=main_out,
                gate_entry=gate, g1_pre=g1_pre, g1_act=g1_act, gate_out=gate_out,
                merged=merged))
        main, gate = merged, gate_out

    llrs = conv2d(main, by_name["out"].w, by_name["out"].b)
    check_finite("out", llrs)
    if want_cache:
        cache.llrs = llrs
    return llrs, cache


def net_backward(params: ModelParams | ParamsView, cfg: NetConfig,
                 cache: ForwardCache, labels: np.ndarray, mask: np.ndarray):
    """Loss and parameter gradients for a cached forward pass.

    The cache must come from a net_forward against the same parameter
    version; a stale cache raises InvalidStateError.  Returns
    (loss, grads) with grads a ConvParams tuple congruent to the layers.
    """
    view = params.snapshot() if isinstance(params, ModelParams) else params
    if cache is None or cache.llrs is None:
        raise InvalidStateError("backward needs a cache-carrying forward pass")
    if cache.version != view.version:
        raise InvalidStateError(
            f"cache built at version {cache.version}, params now at "
            f"{view.version}")
    layers = view.layers
    specs = cfg.layer_specs()
    by_name = {spec.name: layer for spec, layer in zip(specs, layers)}

    loss, dllr = masked_bce_with_grad(cache.llrs, labels, mask)
    grads: dict[str, ConvParams] = {}

    out_in = cache.blocks[-1].merged
    d_merged, dw, db = conv2d_backward(out_in, by_name["out"].w, dllr)
    grads["out"] = ConvParams(dw, db)

    d_gate_carry = None
    for i in reversed(range(cfg.blocks)):
        bc = cache.blocks[i]
        d_main_out = d_merged * bc.gate_out
        d_gate_out = d_merged * bc.main_out
        if d_gate_carry is not None:
            d_gate_out = d_gate_out + d_gate_carry

        d_g1_act, dw, db = conv2d_backward(bc.g1_act, by_name[f"b{i}.gate2"].w,
                                           d_gate_out)
        grads[f"b{i}.gate2"] = ConvParams(dw, db)
        d_g1_pre = relu_backward(bc.g1_pre, d_g1_act)
        d_gate_entry, dw, db = conv2d_backward(bc.gate_entry,
                                               by_name[f"b{i}.gate1"].w, d_g1_pre)
        grads[f"b{i}.gate1"] = ConvParams(dw, db)

        d_m1_act, dw, db = conv2d_backward(bc.m1_act, by_name[f"b{i}.main2"].w,
                                           d_main_out)
        grads[f"b{i}.main2"] = ConvParams(dw, db)
        d_m1_pre = relu_backward(bc.m1_pre, d_m1_act)
        d_main_entry, dw, db = conv2d_backward(bc.main_entry,
                                               by_name[f"b{i}.main1"].w, d_m1_pre)
        grads[f"b{i}.main1"] = ConvParams(dw, db)

        d_merged = d_main_entry + d_main_out  # conv path plus skip
        d_gate_carry = d_gate_entry

    _, dw, db = conv2d_backward(cache.x, by_name["main_in"].w, d_merged)
    grads["main_in"] = ConvParams(dw, db)
    _, dw, db = conv2d_backward(cache.x, by_name["gate_in"].w, d_gate_carry)
    grads["gate_in"] = ConvParams(dw, db)

    ordered = tuple(grads[spec.name] for spec in specs)
    return loss, ordered
