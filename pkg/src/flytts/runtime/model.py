"""Assemble full-model weight stores from the per-module layouts."""

from __future__ import annotations

from .. import decoder, duration, prior_flow, text_encoder
from ..layout import Aliases, Specs
from . import reference
from .config import ModelConfig
from .weights import WeightStore, count_parameters, materialize

# storage-name prefix -> reporting bucket
MODULE_PREFIXES = {
    "text_encoder": "enc.",
    "flow": "flow.",
    "duration": "dur",
    "decoder": "dec.",
    "reference_decoder": "ref.",
}


def model_layout(config: ModelConfig) -> tuple[Specs, Aliases]:
    specs: Specs = {}
    aliases: Aliases = {}
    enc_specs, enc_alias = text_encoder.param_layout(config)
    flow_specs, flow_alias = prior_flow.param_layout(config)
    specs.update(enc_specs)
    specs.update(flow_specs)
    specs.update(duration.param_layout(config))
    if config.decoder == "convnext":
        specs.update(decoder.param_layout(config))
    else:
        specs.update(reference.param_layout(config))
    aliases.update(enc_alias)
    aliases.update(flow_alias)
    return specs, aliases


def init_weights(config: ModelConfig, seed: int = 0) -> WeightStore:
    """Deterministic random weights for ``config``; the config rides along in ``meta``."""
    specs, aliases = model_layout(config)
    return materialize(specs, aliases, seed, meta={"config": config.to_dict(), "seed": int(seed)})


def init_reference_weights(config: ModelConfig, seed: int = 0) -> WeightStore:
    """Reference decoder weights alone, for timing it against any config's latent."""
    return materialize(reference.param_layout(config), {}, seed)


def store_config(store: WeightStore) -> ModelConfig:
    if "config" not in store.meta:
        raise ValueError("weight store carries no model config")
    return ModelConfig.from_dict(store.meta["config"])


def parameter_breakdown(store: WeightStore) -> dict:
    out = {name: count_parameters(store, prefix) for name, prefix in MODULE_PREFIXES.items()}
    out = {k: v for k, v in out.items() if v}
    out["total"] = count_parameters(store)
    return out
