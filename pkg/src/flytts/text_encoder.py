"""Transformer text encoder with sequential grouped parameter sharing.

``g * m`` pre-norm transformer layers are applied in order; layer ``i`` runs
on parameter set ``i // m``. Sharing is by storage aliasing in the weight
store, never by copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nnkit
from .errors import ShapeError
from .layout import Aliases, Specs, TensorSpec, conv_specs, norm_specs


@dataclass(frozen=True)
class SharingPlan:
    groups: int
    layers_per_group: int

    def __post_init__(self):
        if self.groups < 1 or self.layers_per_group < 1:
            raise ValueError(f"sharing plan needs positive g and m, got {self}")

    @property
    def total_layers(self) -> int:
        return self.groups * self.layers_per_group

    @classmethod
    def from_config(cls, config) -> "SharingPlan":
        return cls(config.g1, config.m1)


@dataclass(frozen=True)
class EncodedText:
    hidden: np.ndarray        # (D, T_text)
    prior_mean: np.ndarray    # (D_z, T_text)
    prior_logstd: np.ndarray  # (D_z, T_text)


def group_index(layer_i: int, m: int, total_layers: int | None = None) -> int:
    """Parameter set serving 0-based layer ``layer_i`` when sets span ``m`` layers."""
    if m < 1:
        raise ValueError(f"layers per group must be >= 1, got {m}")
    if layer_i < 0 or (total_layers is not None and layer_i >= total_layers):
        raise IndexError(f"layer {layer_i} outside 0..{total_layers}")
    return layer_i // m


def layer_slot(i: int) -> str:
    return f"enc.layer{i}"


def group_storage(j: int) -> str:
    return f"enc.group{j}"


def param_layout(config) -> tuple[Specs, Aliases]:
    d, f, k = config.d_model, config.ffn_dim, config.ffn_kernel
    layer: dict[str, TensorSpec] = {}
    layer.update(norm_specs("ln1.", d))
    for p in "qkvo":
        layer[f"attn.{p}.weight"] = TensorSpec((d, d), "uniform", d)
        layer[f"attn.{p}.bias"] = TensorSpec((d,), "uniform", d)
    layer.update(norm_specs("ln2.", d))
    layer.update(conv_specs("ffn.conv1.", f, d, k))
    layer.update(conv_specs("ffn.conv2.", d, f, k))

    specs: Specs = {
        "enc.emb": {"weight": TensorSpec((config.vocab_size, d), "normal", value=d ** -0.5)}
    }
    plan = SharingPlan.from_config(config)
    for j in range(plan.groups):
        specs[group_storage(j)] = dict(layer)
    out = dict(norm_specs("ln.", d))
    out.update(conv_specs("proj.", 2 * config.d_latent, d, 1))
    specs["enc.out"] = out

    aliases = {layer_slot(i): group_storage(group_index(i, plan.layers_per_group))
               for i in range(plan.total_layers)}
    return specs, aliases


def check_plan(weights, plan: SharingPlan) -> None:
    """Reject stores whose layer aliasing disagrees with ``plan``."""
    slots = [layer_slot(i) for i in range(plan.total_layers)]
    storages = [weights.resolve(s) for s in slots]
    if len(set(storages)) != plan.groups:
        raise ShapeError(
            f"encoder plan wants {plan.groups} parameter sets, store has {len(set(storages))}")
    for i, s in enumerate(storages):
        head = storages[group_index(i, plan.layers_per_group) * plan.layers_per_group]
        if s != head:
            raise ShapeError(f"{slots[i]} is not aliased to its group's parameter set")


def transformer_layer(h, p, heads: int, ffn_kernel: int):
    a = nnkit.layer_norm(h, p["ln1.gamma"], p["ln1.beta"])
    attn = {name[len("attn."):]: t for name, t in p.items() if name.startswith("attn.")}
    h = h + nnkit.multi_head_attention(a, attn, heads)
    f = nnkit.layer_norm(h, p["ln2.gamma"], p["ln2.beta"])
    pad = ffn_kernel // 2
    f = nnkit.relu(nnkit.conv1d(f, p["ffn.conv1.weight"], p["ffn.conv1.bias"], padding=pad))
    f = nnkit.conv1d(f, p["ffn.conv2.weight"], p["ffn.conv2.bias"], padding=pad)
    return (h + f).astype(nnkit.DTYPE)


def encode_text(tokens, weights, plan: SharingPlan, config) -> EncodedText:
    ids = np.asarray(tokens)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("token sequence must be a non-empty 1-D list of ids")
    if ids.dtype.kind not in "iu":
        raise ValueError(f"token ids must be integers, got dtype {ids.dtype}")
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise ValueError(
            f"token id out of vocabulary range [0, {config.vocab_size}): "
            f"min {ids.min()}, max {ids.max()}")

    emb = weights.tensor("enc.emb", "weight")
    if emb.shape[1] != config.d_model:
        raise ShapeError(f"embedding width {emb.shape[1]} != d_model {config.d_model}")
    t = ids.size
    h = emb[ids].T.astype(np.float64) * math.sqrt(config.d_model)
    h = (h + nnkit.sinusoidal_positions(config.d_model, t)).astype(nnkit.DTYPE)

    check_plan(weights, plan)
    for i in range(plan.total_layers):
        h = transformer_layer(h, weights.params(layer_slot(i)), config.heads, config.ffn_kernel)

    out = weights.params("enc.out")
    h = nnkit.layer_norm(h, out["ln.gamma"], out["ln.beta"])
    stats = nnkit.conv1d(h, out["proj.weight"], out["proj.bias"])
    dz = config.d_latent
    return EncodedText(hidden=h, prior_mean=stats[:dz], prior_logstd=stats[dz:])
