"""ConvNeXt decoder producing Fourier magnitude/phase at frame rate.

embed (k7 conv + norm) -> ConvNeXt blocks -> norm + linear head to
``2N`` channels -> iSTFT. Every stage keeps the frame count.
"""

from __future__ import annotations

import numpy as np

from . import nnkit, spectral
from .errors import ShapeError
from .layout import Specs, TensorSpec, conv_specs, norm_specs
from .spectral import SpectralFrames, StftConfig, Waveform

EMBED_KERNEL = 7
DW_KERNEL = 7


def block_storage(b: int) -> str:
    return f"dec.block{b}"


def param_layout(config) -> Specs:
    d, mid, n_bins = config.d_dec, config.d_mid, config.n_bins
    specs: Specs = {}
    embed = conv_specs("conv.", d, config.d_latent, EMBED_KERNEL)
    embed.update(norm_specs("ln.", d))
    specs["dec.embed"] = embed
    block = {
        "dw.weight": TensorSpec((d, DW_KERNEL), "uniform", DW_KERNEL),
        "dw.bias": TensorSpec((d,), "uniform", DW_KERNEL),
    }
    block.update(norm_specs("ln.", d))
    block.update(conv_specs("pw1.", mid, d, 1))
    block.update(conv_specs("pw2.", d, mid, 1))
    block["scale"] = TensorSpec((d,), "const", value=1.0 / config.num_decoder_blocks)
    for b in range(config.num_decoder_blocks):
        specs[block_storage(b)] = dict(block)
    head = dict(norm_specs("ln.", d))
    head.update(conv_specs("proj.", 2 * n_bins, d, 1))
    specs["dec.head"] = head
    return specs


def embed_frames(z, weights):
    p = weights.params("dec.embed") if hasattr(weights, "params") else weights
    h = nnkit.conv1d(z, p["conv.weight"], p["conv.bias"], padding=EMBED_KERNEL // 2)
    return nnkit.layer_norm(h, p["ln.gamma"], p["ln.beta"])


def convnext_block(h, params):
    """``h + scale * pw2(gelu(pw1(norm(dwconv(h)))))``."""
    p = params
    k = p["dw.weight"].shape[1]
    x = nnkit.depthwise_conv1d(h, p["dw.weight"], p["dw.bias"], padding=k // 2)
    x = nnkit.layer_norm(x, p["ln.gamma"], p["ln.beta"])
    x = nnkit.gelu(nnkit.conv1d(x, p["pw1.weight"], p["pw1.bias"]))
    x = nnkit.conv1d(x, p["pw2.weight"], p["pw2.bias"])
    y = h.astype(np.float64) + p["scale"].astype(np.float64)[:, None] * x
    return y.astype(nnkit.DTYPE)


def fourier_head(h, weights, config) -> SpectralFrames:
    p = weights.params("dec.head") if hasattr(weights, "params") else weights
    x = nnkit.layer_norm(h, p["ln.gamma"], p["ln.beta"])
    x = nnkit.conv1d(x, p["proj.weight"], p["proj.bias"])
    n = config.n_bins
    if x.shape[0] != 2 * n:
        raise ShapeError(f"head produced {x.shape[0]} channels, expected 2*{n}")
    logm = x[:n].astype(np.float64)
    mag = np.exp(np.minimum(logm, config.clip_max))
    return SpectralFrames(mag, x[n:].astype(np.float64))


def decode_spectrum(z, weights, config) -> SpectralFrames:
    z = np.asarray(z, dtype=nnkit.DTYPE)
    if z.ndim != 2 or z.shape[1] == 0:
        raise ValueError(f"decoder needs a (D_z, T) latent with T >= 1, got {z.shape}")
    h = embed_frames(z, weights)
    for b in range(config.num_decoder_blocks):
        h = convnext_block(h, weights.params(block_storage(b)))
    return fourier_head(h, weights, config)


def decode(z, weights, config) -> Waveform:
    spec = decode_spectrum(z, weights, config)
    return spectral.istft(spec, StftConfig(config.n_fft, config.hop), config.sample_rate)
