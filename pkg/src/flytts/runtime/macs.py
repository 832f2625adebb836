"""Closed-form multiply-accumulate counts per pipeline stage."""

from __future__ import annotations

import math
from typing import Optional

from .config import ModelConfig
from .reference import POST_KERNEL, PRE_KERNEL


def conv1d_macs(c_out: int, c_in: int, k: int, t_out: int) -> int:
    return c_out * c_in * k * t_out


def conv_transpose1d_macs(c_in: int, c_out: int, k: int, t_in: int) -> int:
    return c_in * c_out * k * t_in


def encoder_macs(config: ModelConfig, tokens: int) -> int:
    d, t = config.d_model, tokens
    per_layer = (
        4 * conv1d_macs(d, d, 1, t)                  # q, k, v, out projections
        + 2 * d * t * t                              # scores and weighted values
        + conv1d_macs(config.ffn_dim, d, config.ffn_kernel, t)
        + conv1d_macs(d, config.ffn_dim, config.ffn_kernel, t)
    )
    proj = conv1d_macs(2 * config.d_latent, d, 1, t)
    dur = 2 * conv1d_macs(d, d, config.dp_kernel, t) + conv1d_macs(1, d, 1, t)
    return config.encoder_layers * per_layer + proj + dur


def flow_macs(config: ModelConfig, frames: int) -> int:
    half, hid, t = config.d_latent // 2, config.flow_hidden, frames
    wn = 0
    for i in range(config.wn_layers):
        wn += conv1d_macs(2 * hid, hid, config.wn_kernel, t)
        wn += conv1d_macs(2 * hid if i < config.wn_layers - 1 else hid, hid, 1, t)
    step = conv1d_macs(hid, half, 1, t) + wn + conv1d_macs(half, hid, 1, t)
    return config.flow_steps * step


def convnext_decoder_macs(config: ModelConfig, frames: int) -> int:
    d, mid, t = config.d_dec, config.d_mid, frames
    embed = conv1d_macs(d, config.d_latent, 7, t)
    block = d * 7 * t + conv1d_macs(mid, d, 1, t) + conv1d_macs(d, mid, 1, t)
    head = conv1d_macs(2 * config.n_bins, d, 1, t)
    return embed + config.num_decoder_blocks * block + head


def istft_macs(config: ModelConfig, frames: int) -> int:
    # one complex butterfly ~ 4 real MACs; plus windowing and overlap-add
    n = config.n_fft
    fft = 4 * (n // 4) * max(1, int(math.log2(n // 2)))
    return frames * (fft + 2 * n)


def reference_decoder_macs(config: ModelConfig, frames: int) -> int:
    c0, t = config.ref_initial_channels, frames
    total = conv1d_macs(c0, config.d_latent, PRE_KERNEL, t)
    c = c0
    for u, k in zip(config.ref_upsample_rates, config.ref_upsample_kernels):
        total += conv_transpose1d_macs(c, c // 2, k, t)
        c //= 2
        t *= u
        for rk, dils in zip(config.ref_resblock_kernels, config.ref_resblock_dilations):
            total += 2 * len(dils) * conv1d_macs(c, c, rk, t)
    return total + conv1d_macs(1, c, POST_KERNEL, t)


def estimate_macs(config: ModelConfig, frames: int, tokens: Optional[int] = None) -> dict:
    """Per-stage MACs for synthesizing ``frames`` latent frames.

    The encoder stage runs at ``tokens`` text positions (default: one per
    frame, an upper bound). Both decoders are always reported, with their
    per-output-sample cost, so either preset can be compared to the other.
    """
    if frames < 2:
        raise ValueError(f"frames must be >= 2, got {frames}")
    tokens = frames if tokens is None else tokens
    conv_dec = convnext_decoder_macs(config, frames)
    ref_dec = reference_decoder_macs(config, frames)
    istft = istft_macs(config, frames)
    conv_samples = (frames - 1) * config.hop
    ref_samples = frames * config.ref_upsample_factor
    active_decoder = conv_dec + istft if config.decoder == "convnext" else ref_dec
    return {
        "encoder": encoder_macs(config, tokens),
        "flow": flow_macs(config, frames),
        "decoder": conv_dec if config.decoder == "convnext" else ref_dec,
        "istft": istft if config.decoder == "convnext" else 0,
        "convnext_decoder": conv_dec,
        "convnext_decoder_per_sample": (conv_dec + istft) / conv_samples,
        "reference_decoder": ref_dec,
        "reference_decoder_per_sample": ref_dec / ref_samples,
        "total": encoder_macs(config, tokens) + flow_macs(config, frames) + active_decoder,
    }
