"""Brute-force reference implementations.

Plain loops over Python floats; nothing here calls into ``flytts`` kernels,
so agreement with the engine is an independent check.
"""

import cmath
import math

import numpy as np


def conv1d(x, w, b, padding=0, dilation=1):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    c_out, c_in, k = w.shape
    t = x.shape[1]
    t_out = t + 2 * padding - dilation * (k - 1)
    y = np.zeros((c_out, t_out))
    for c in range(c_out):
        for s in range(t_out):
            acc = 0.0 if b is None else float(b[c])
            for i in range(c_in):
                for j in range(k):
                    src = s + j * dilation - padding
                    if 0 <= src < t:
                        acc += w[c, i, j] * x[i, src]
            y[c, s] = acc
    return y


def depthwise_conv1d(x, w, b, padding=0):
    x = np.asarray(x, dtype=float)
    c, k = np.shape(w)
    t = x.shape[1]
    t_out = t + 2 * padding - (k - 1)
    y = np.zeros((c, t_out))
    for ch in range(c):
        for s in range(t_out):
            acc = 0.0 if b is None else float(b[ch])
            for j in range(k):
                src = s + j - padding
                if 0 <= src < t:
                    acc += w[ch][j] * x[ch, src]
            y[ch, s] = acc
    return y


def conv_transpose1d(x, w, b, stride, padding):
    x = np.asarray(x, dtype=float)
    c_in, c_out, k = np.shape(w)
    t = x.shape[1]
    full = (t - 1) * stride + k
    y = np.zeros((c_out, full))
    for i in range(c_in):
        for o in range(c_out):
            for s in range(t):
                for j in range(k):
                    y[o, s * stride + j] += w[i][o][j] * x[i, s]
    y = y[:, padding:full - padding]
    if b is not None:
        y += np.asarray(b, dtype=float)[:, None]
    return y


def layer_norm_columns(x, gamma, beta, eps=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    c, t = x.shape
    for s in range(t):
        col = [x[i, s] for i in range(c)]
        mean = sum(col) / c
        var = sum((v - mean) ** 2 for v in col) / c
        for i in range(c):
            out[i, s] = (col[i] - mean) / math.sqrt(var + eps) * gamma[i] + beta[i]
    return out


def gelu(v):
    return v * 0.5 * (1.0 + math.erf(v / math.sqrt(2.0)))


def leaky_relu(v, slope=0.1):
    return v if v >= 0 else slope * v


def softmax_row(row):
    top = max(row)
    ex = [math.exp(v - top) for v in row]
    z = sum(ex)
    return [e / z for e in ex]


def sinusoid(d, t):
    out = np.zeros((d, t))
    for c in range(d):
        for s in range(t):
            rate = 10000.0 ** (2 * (c // 2) / d)
            out[c, s] = math.sin(s / rate) if c % 2 == 0 else math.cos(s / rate)
    return out


def attention(x, p, heads, mask=None):
    """Per-head, per-query loops over explicit dot products."""
    x = np.asarray(x, dtype=float)
    d, t = x.shape
    dh = d // heads

    def lin(name):
        w = np.asarray(p[f"{name}.weight"], dtype=float)
        bias = np.asarray(p[f"{name}.bias"], dtype=float)
        return [[sum(w[r, c] * x[c, s] for c in range(d)) + bias[r] for s in range(t)] for r in range(d)]

    q, k, v = lin("q"), lin("k"), lin("v")
    concat = np.zeros((d, t))
    for h in range(heads):
        rows = range(h * dh, (h + 1) * dh)
        for qi in range(t):
            logits = []
            for ki in range(t):
                if mask is not None and not mask[qi][ki]:
                    logits.append(None)
                    continue
                logits.append(sum(q[r][qi] * k[r][ki] for r in rows) / math.sqrt(dh))
            top = max(l for l in logits if l is not None)
            ex = [0.0 if l is None else math.exp(l - top) for l in logits]
            z = sum(ex)
            for r in rows:
                concat[r, qi] = sum(ex[ki] / z * v[r][ki] for ki in range(t))
    wo = np.asarray(p["o.weight"], dtype=float)
    bo = np.asarray(p["o.bias"], dtype=float)
    return np.array([[sum(wo[r, c] * concat[c, s] for c in range(d)) + bo[r] for s in range(t)]
                     for r in range(d)])


def dft(x, inverse=False):
    n = len(x)
    sign = 1 if inverse else -1
    out = []
    for k in range(n):
        acc = 0j
        for j in range(n):
            acc += complex(x[j]) * cmath.exp(sign * 2j * math.pi * j * k / n)
        out.append(acc / n if inverse else acc)
    return np.array(out)


def rdft(x):
    n = len(x)
    return dft(x)[: n // 2 + 1]


def hann(n):
    return [0.5 - 0.5 * math.cos(2 * math.pi * i / n) for i in range(n)]


def stft_frames(x, n_fft, hop):
    """Reflect-padded, Hann-windowed frames, each run through the direct DFT."""
    x = list(map(float, x))
    pad = n_fft // 2
    padded = [x[pad - i] for i in range(pad)] + x + [x[-2 - i] for i in range(pad)]
    w = hann(n_fft)
    t = len(x) // hop + 1
    return [rdft([padded[f * hop + i] * w[i] for i in range(n_fft)]) for f in range(t)]


def kl_closed_form(mq, lq, mp, lp):
    sq, sp = math.exp(lq), math.exp(lp)
    return math.log(sp / sq) + (sq ** 2 + (mq - mp) ** 2) / (2 * sp ** 2) - 0.5
