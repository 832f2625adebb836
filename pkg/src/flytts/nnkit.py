"""Numeric kernels the networks are assembled from.

Activations are ``(C, T)`` float32 arrays (an optional leading batch axis is
accepted by the convolutions). Convolutions and attention accumulate in
float64 and hand back float32.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.special import erf

from .errors import ShapeError

DTYPE = np.float32
LN_EPS = 1e-6
LEAKY_SLOPE = 0.1


def _out_len(t: int, k: int, padding: int, dilation: int) -> int:
    return t + 2 * padding - dilation * (k - 1)


def conv1d(x, weight, bias=None, padding: int = 0, dilation: int = 1):
    """Cross-correlation ``y[c,t] = b[c] + sum_{i,k} w[c,i,k] x[i, t + k*dil - pad]``.

    ``x`` is ``(C_in, T)`` or ``(B, C_in, T)``; ``weight`` is ``(C_out, C_in, K)``.
    """
    x = np.asarray(x)
    weight = np.asarray(weight)
    if weight.ndim != 3:
        raise ShapeError(f"conv1d weight must be (C_out, C_in, K), got {weight.shape}")
    c_out, c_in, k = weight.shape
    if x.ndim not in (2, 3) or x.shape[-2] != c_in:
        raise ShapeError(f"conv1d expects {c_in} input channels, got x of shape {x.shape}")
    if k < 1 or padding < 0 or dilation < 1:
        raise ShapeError(f"bad conv geometry K={k} padding={padding} dilation={dilation}")
    t = x.shape[-1]
    t_out = _out_len(t, k, padding, dilation)
    if t_out < 1:
        raise ShapeError(f"conv1d output length {t_out} < 1 (T={t}, K={k}, pad={padding})")

    xp = x.astype(np.float64)
    if padding:
        pad = [(0, 0)] * (x.ndim - 1) + [(padding, padding)]
        xp = np.pad(xp, pad)
    # im2col: one contiguous GEMM instead of K strided ones
    cols = np.stack([xp[..., j * dilation:j * dilation + t_out] for j in range(k)], axis=-2)
    cols = cols.reshape(x.shape[:-2] + (c_in * k, t_out))
    y = weight.astype(np.float64).reshape(c_out, c_in * k) @ cols
    if bias is not None:
        y += np.asarray(bias, dtype=np.float64)[:, None]
    return y.astype(DTYPE)


def depthwise_conv1d(x, weight, bias=None, padding: int = 0):
    """Per-channel correlation ``y[c,t] = b[c] + sum_k w[c,k] x[c, t+k-pad]``."""
    x = np.asarray(x)
    weight = np.asarray(weight)
    if weight.ndim != 2 or x.ndim not in (2, 3) or x.shape[-2] != weight.shape[0]:
        raise ShapeError(
            f"depthwise_conv1d channel mismatch: x {x.shape} vs weight {weight.shape}")
    c, k = weight.shape
    t_out = _out_len(x.shape[-1], k, padding, 1)
    if t_out < 1 or padding < 0:
        raise ShapeError(f"depthwise_conv1d output length {t_out} < 1")
    xp = x.astype(np.float64)
    if padding:
        xp = np.pad(xp, [(0, 0)] * (x.ndim - 1) + [(padding, padding)])
    w = weight.astype(np.float64)
    y = np.zeros(x.shape[:-1] + (t_out,), dtype=np.float64)
    for j in range(k):
        y += w[:, j:j + 1] * xp[..., j:j + t_out]
    if bias is not None:
        y += np.asarray(bias, dtype=np.float64)[:, None]
    return y.astype(DTYPE)


def conv_transpose1d(x, weight, bias=None, stride: int = 1, padding: int = 0):
    """Transposed convolution with ``weight`` shaped ``(C_in, C_out, K)``.

    ``y[o, t*stride + k - padding] += w[i, o, k] x[i, t]``; output length is
    ``(T-1)*stride - 2*padding + K``.
    """
    x = np.asarray(x)
    weight = np.asarray(weight)
    if weight.ndim != 3 or x.ndim != 2 or x.shape[0] != weight.shape[0]:
        raise ShapeError(f"conv_transpose1d mismatch: x {x.shape} vs weight {weight.shape}")
    c_in, c_out, k = weight.shape
    t = x.shape[1]
    full = (t - 1) * stride + k
    t_out = full - 2 * padding
    if t_out < 1:
        raise ShapeError(f"conv_transpose1d output length {t_out} < 1")
    xd = x.astype(np.float64)
    w = np.ascontiguousarray(weight.astype(np.float64).transpose(2, 1, 0)).reshape(k * c_out, c_in)
    taps = (w @ xd).reshape(k, c_out, t)
    y = np.zeros((c_out, full), dtype=np.float64)
    for j in range(k):
        y[:, j:j + (t - 1) * stride + 1:stride] += taps[j]
    y = y[:, padding:padding + t_out]
    if bias is not None:
        y = y + np.asarray(bias, dtype=np.float64)[:, None]
    return y.astype(DTYPE)


def layer_norm(x, gamma, beta, eps: float = LN_EPS, axis: Optional[int] = None):
    """Normalize over the channel axis (axis 0 of a vector, axis -2 otherwise)."""
    x = np.asarray(x)
    if axis is None:
        axis = 0 if x.ndim == 1 else -2
    c = x.shape[axis]
    gamma = np.asarray(gamma)
    beta = np.asarray(beta)
    if c < 1 or gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"layer_norm over {c} channels got gamma {gamma.shape}, beta {beta.shape}")
    xd = x.astype(np.float64)
    mean = xd.mean(axis=axis, keepdims=True)
    var = ((xd - mean) ** 2).mean(axis=axis, keepdims=True)
    y = (xd - mean) / np.sqrt(var + eps)
    shape = [1] * x.ndim
    shape[axis] = c
    y = y * gamma.astype(np.float64).reshape(shape) + beta.astype(np.float64).reshape(shape)
    return y.astype(DTYPE)


def gelu(x):
    """Exact GELU, ``x * Phi(x)`` with the erf-based normal CDF."""
    xd = np.asarray(x, dtype=np.float64)
    y = 0.5 * xd * (1.0 + erf(xd / math.sqrt(2.0)))
    return y.astype(DTYPE) if np.ndim(y) else float(y)


def leaky_relu(x, slope: float = LEAKY_SLOPE):
    xa = np.asarray(x)
    y = np.where(xa >= 0, xa, slope * xa)
    if np.ndim(y) == 0:
        return float(y)
    return y.astype(xa.dtype if xa.dtype.kind == "f" else DTYPE)


def relu(x):
    return np.maximum(x, 0).astype(DTYPE)


def softmax(scores, axis: int = -1):
    s = scores - scores.max(axis=axis, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=axis, keepdims=True)


def multi_head_attention(x, params: dict, heads: int, mask=None):
    """Scaled dot-product self-attention over a ``(D, T)`` sequence.

    ``params`` holds ``q.weight``/``k.weight``/``v.weight``/``o.weight`` as
    ``(D, D)`` matrices plus matching ``*.bias`` vectors. ``mask`` is a
    boolean ``(T, T)`` array where True marks a key a query may attend to.
    """
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError(f"attention expects (D, T), got {x.shape}")
    d, t = x.shape
    if heads < 1 or d % heads:
        raise ShapeError(f"model dim {d} not divisible by {heads} heads")
    dh = d // heads
    xd = x.astype(np.float64)

    def proj(name, inp):
        w = np.asarray(params[f"{name}.weight"], dtype=np.float64)
        b = np.asarray(params[f"{name}.bias"], dtype=np.float64)
        return w @ inp + b[:, None]

    q = proj("q", xd).reshape(heads, dh, t)
    k = proj("k", xd).reshape(heads, dh, t)
    v = proj("v", xd).reshape(heads, dh, t)
    scores = np.einsum("hdq,hdk->hqk", q, k) / math.sqrt(dh)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (t, t):
            raise ShapeError(f"mask must be ({t}, {t}), got {mask.shape}")
        if not mask.any(axis=1).all():
            raise ValueError("attention mask leaves a query with no visible key")
        scores = np.where(mask[None], scores, -np.inf)
    attn = softmax(scores, axis=-1)
    out = np.einsum("hqk,hdk->hdq", attn, v).reshape(d, t)
    return proj("o", out).astype(DTYPE)


def sinusoidal_positions(d: int, t: int):
    """Absolute sin/cos position table shaped ``(d, t)``."""
    pos = np.arange(t, dtype=np.float64)[None, :]
    i = np.arange(d // 2 + d % 2, dtype=np.float64)[:, None]
    angle = pos / np.power(10000.0, 2.0 * i / d)
    pe = np.zeros((d, t), dtype=np.float64)
    pe[0::2] = np.sin(angle)[: (d + 1) // 2]
    pe[1::2] = np.cos(angle)[: d // 2]
    return pe.astype(DTYPE)
