"""Checkpoint serialization: a single .npz holding a JSON header plus one
shape-tagged array pair per layer.  Round trips are bit-exact at the
stored dtype."""
from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..errors import ConfigurationError
from .model import ConvParams, ModelParams, NetConfig, _frozen

_FORMAT = "adaptrx-checkpoint-v1"


def save_params(path, params: ModelParams) -> None:
    meta = {
        "format": _FORMAT,
        "config": asdict(params.cfg),
        "version": params.version,
        "dtype": str(params.layers[0].w.dtype),
        "layers": [spec.name for spec in params.cfg.layer_specs()],
    }
    arrays = {"meta": np.asarray(json.dumps(meta, sort_keys=True))}
    for i, layer in enumerate(params.layers):
        arrays[f"w{i}"] = layer.w
        arrays[f"b{i}"] = layer.b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_params(path) -> ModelParams:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != _FORMAT:
            raise ConfigurationError(f"not a recognized checkpoint: {path}")
        cfg_dict = dict(meta["config"])
        if cfg_dict.get("param_budget") is not None:
            cfg_dict["param_budget"] = int(cfg_dict["param_budget"])
        cfg = NetConfig(**cfg_dict)
        layers = []
        for i in range(len(cfg.layer_specs())):
            layers.append(ConvParams(_frozen(data[f"w{i}"].copy()),
                                     _frozen(data[f"b{i}"].copy())))
    return ModelParams(cfg, layers, version=int(meta["version"]))
