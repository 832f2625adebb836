"""HiFi-GAN-shaped transposed-convolution decoder used as the speed baseline."""

from __future__ import annotations

import numpy as np

from .. import nnkit
from ..errors import ShapeError
from ..layout import Specs, TensorSpec
from ..spectral import Waveform

LRELU_SLOPE = 0.1
FINAL_SLOPE = 0.01
PRE_KERNEL = 7
POST_KERNEL = 7


def _pad(kernel: int, dilation: int = 1) -> int:
    return (kernel * dilation - dilation) // 2


def _stage_channels(config, i: int) -> int:
    return config.ref_initial_channels // (2 ** (i + 1))


def param_layout(config) -> Specs:
    c0, dz = config.ref_initial_channels, config.d_latent
    specs: Specs = {
        "ref.pre": {
            "weight": TensorSpec((c0, dz, PRE_KERNEL), "uniform", dz * PRE_KERNEL),
            "bias": TensorSpec((c0,), "uniform", dz * PRE_KERNEL),
        }
    }
    for i, (u, k) in enumerate(zip(config.ref_upsample_rates, config.ref_upsample_kernels)):
        c_in, c_out = c0 // 2 ** i, _stage_channels(config, i)
        # transposed conv weights are (C_in, C_out, K); fan-in counts the taps landing per output
        fan = c_in * max(1, k // u)
        specs[f"ref.up{i}"] = {
            "weight": TensorSpec((c_in, c_out, k), "uniform", fan),
            "bias": TensorSpec((c_out,), "uniform", fan),
        }
        for j, (rk, dils) in enumerate(zip(config.ref_resblock_kernels, config.ref_resblock_dilations)):
            group = {}
            for n, _ in enumerate(dils):
                for part in ("c1", "c2"):
                    group[f"{part}.{n}.weight"] = TensorSpec((c_out, c_out, rk), "uniform", c_out * rk)
                    group[f"{part}.{n}.bias"] = TensorSpec((c_out,), "uniform", c_out * rk)
            specs[f"ref.res{i}.{j}"] = group
    c_last = _stage_channels(config, len(config.ref_upsample_rates) - 1)
    specs["ref.post"] = {
        "weight": TensorSpec((1, c_last, POST_KERNEL), "uniform", c_last * POST_KERNEL),
        "bias": TensorSpec((1,), "uniform", c_last * POST_KERNEL),
    }
    return specs


def resblock(x, p, kernel: int, dilations):
    for n, d in enumerate(dilations):
        xt = nnkit.leaky_relu(x, LRELU_SLOPE)
        xt = nnkit.conv1d(xt, p[f"c1.{n}.weight"], p[f"c1.{n}.bias"], padding=_pad(kernel, d), dilation=d)
        xt = nnkit.leaky_relu(xt, LRELU_SLOPE)
        xt = nnkit.conv1d(xt, p[f"c2.{n}.weight"], p[f"c2.{n}.bias"], padding=_pad(kernel, 1))
        x = xt + x
    return x


def reference_decode(z, weights, config) -> Waveform:
    """Latent frames to ``T * prod(upsample_rates)`` samples."""
    z = np.asarray(z, dtype=nnkit.DTYPE)
    if z.ndim != 2 or z.shape[0] != config.d_latent or z.shape[1] < 1:
        raise ShapeError(f"reference decoder expects ({config.d_latent}, T>=1), got {z.shape}")
    pre = weights.params("ref.pre")
    if pre["weight"].shape != (config.ref_initial_channels, config.d_latent, PRE_KERNEL):
        raise ShapeError("reference weights do not match config")
    x = nnkit.conv1d(z, pre["weight"], pre["bias"], padding=_pad(PRE_KERNEL))
    n_res = len(config.ref_resblock_kernels)
    for i, (u, k) in enumerate(zip(config.ref_upsample_rates, config.ref_upsample_kernels)):
        up = weights.params(f"ref.up{i}")
        x = nnkit.leaky_relu(x, LRELU_SLOPE)
        x = nnkit.conv_transpose1d(x, up["weight"], up["bias"], stride=u, padding=(k - u) // 2)
        acc = np.zeros(x.shape, dtype=np.float64)
        for j, (rk, dils) in enumerate(zip(config.ref_resblock_kernels, config.ref_resblock_dilations)):
            acc += resblock(x, weights.params(f"ref.res{i}.{j}"), rk, dils)
        x = (acc / n_res).astype(nnkit.DTYPE)
    x = nnkit.leaky_relu(x, FINAL_SLOPE)
    post = weights.params("ref.post")
    x = nnkit.conv1d(x, post["weight"], post["bias"], padding=_pad(POST_KERNEL))
    return Waveform(np.tanh(x[0]).astype(np.float32), config.sample_rate)
