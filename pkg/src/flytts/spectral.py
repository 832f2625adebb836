"""Radix-2 FFT, STFT analysis and iSTFT overlap-add synthesis.

All transforms work on the last axis and broadcast over leading axes, so a
whole ``(T, n)`` block of frames goes through one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ShapeError

ENVELOPE_FLOOR = 1e-11


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int = 22050

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class SpectralFrames:
    magnitude: np.ndarray  # (N, T), > 0 when produced by the decoder head
    phase: np.ndarray      # (N, T), radians

    def __post_init__(self):
        if np.shape(self.magnitude) != np.shape(self.phase):
            raise ShapeError(f"magnitude {np.shape(self.magnitude)} vs phase {np.shape(self.phase)}")

    @property
    def bins(self) -> int:
        return self.magnitude.shape[0]

    @property
    def frames(self) -> int:
        return self.magnitude.shape[1]

    def complex(self) -> np.ndarray:
        m = np.asarray(self.magnitude, dtype=np.float64)
        p = np.asarray(self.phase, dtype=np.float64)
        return m * (np.cos(p) + 1j * np.sin(p))


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 1024
    hop: int = 256

    def __post_init__(self):
        if not _is_pow2(self.n_fft) or self.n_fft < 2:
            raise ValueError(f"n_fft must be a power of two >= 2, got {self.n_fft}")
        if not 0 < self.hop <= self.n_fft // 2:
            raise ValueError(f"hop must be in (0, n_fft/2], got {self.hop}")

    @property
    def bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def window(self) -> np.ndarray:
        return hann_window(self.n_fft)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@lru_cache(maxsize=None)
def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window."""
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=None)
def _twiddles(m: int, sign: int) -> np.ndarray:
    tw = np.exp(sign * 2j * np.pi * np.arange(m // 2) / m)
    tw.setflags(write=False)
    return tw


def fft(x, inverse: bool = False) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT along the last axis.

    The inverse is scaled by ``1/n``.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    lead = a.shape[:-1]
    a = a[..., _bit_reverse(n)]
    sign = 1 if inverse else -1
    m = 2
    while m <= n:
        half = m // 2
        blocks = a.reshape(lead + (n // m, m))
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(m, sign)
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        m *= 2
    if inverse:
        a = a / n
    return a


def rfft(frame) -> np.ndarray:
    """Real-input FFT returning the ``n/2 + 1`` non-negative-frequency bins.

    Packs even/odd samples into one complex sequence of length ``n/2`` and
    untangles the two half-length spectra afterwards.
    """
    x = np.asarray(frame, dtype=np.float64)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"rfft length must be a power of two, got {n}")
    if n == 1:
        return x.astype(np.complex128)
    h = n // 2
    z = fft(x[..., 0::2] + 1j * x[..., 1::2])
    zr = np.conj(z[..., (-np.arange(h + 1)) % h])  # conj(Z[h - k]) for k = 0..h
    zk = z[..., np.arange(h + 1) % h]
    even = 0.5 * (zk + zr)
    odd = -0.5j * (zk - zr)
    return even + np.exp(-2j * np.pi * np.arange(h + 1) / n) * odd


def irfft(spec, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`rfft` (scaled by ``1/n``).

    The imaginary parts of the DC and Nyquist bins are ignored, as for any
    Hermitian-symmetric inverse transform.
    """
    X = np.asarray(spec, dtype=np.complex128)
    bins = X.shape[-1]
    if n is None:
        n = 2 * (bins - 1)
    if not _is_pow2(n) or bins != n // 2 + 1:
        raise ValueError(f"irfft needs n a power of two with n/2+1 == {bins} bins, got n={n}")
    if n == 1:
        return X.real.copy()
    X = X.copy()
    X[..., 0] = X[..., 0].real
    X[..., -1] = X[..., -1].real
    h = n // 2
    k = np.arange(h)
    xk = X[..., k]
    xr = np.conj(X[..., h - k])
    even = 0.5 * (xk + xr)
    odd = 0.5 * (xk - xr) * np.exp(2j * np.pi * k / n)
    z = fft(even + 1j * odd, inverse=True)
    out = np.empty(X.shape[:-1] + (n,), dtype=np.float64)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def stft(x, cfg: StftConfig) -> SpectralFrames:
    """Centered, Hann-windowed analysis; ``floor(len/hop) + 1`` frames."""
    samples = x.samples if isinstance(x, Waveform) else x
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("stft needs a non-empty 1-D signal")
    pad = cfg.n_fft // 2
    padded = np.pad(samples, pad, mode="reflect") if samples.size > 1 else np.pad(samples, pad, mode="edge")
    t = samples.size // cfg.hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.n_fft)[::cfg.hop][:t]
    spec = rfft(frames * cfg.window).T  # (N, T)
    return SpectralFrames(np.abs(spec), np.angle(spec))


def istft(spec: SpectralFrames, cfg: StftConfig, sample_rate: int = 22050) -> Waveform:
    """Windowed overlap-add inverse; returns ``(T - 1) * hop`` samples."""
    if spec.bins != cfg.bins:
        raise ShapeError(f"spectrum has {spec.bins} bins, config expects {cfg.bins}")
    t = spec.frames
    if t < 2:
        raise ValueError(f"istft needs at least 2 frames, got {t}")
    n, hop = cfg.n_fft, cfg.hop
    frames = irfft(spec.complex().T, n) * cfg.window  # (T, n)
    total = n + (t - 1) * hop
    y = np.zeros(total)
    env = np.zeros(total)
    wsq = cfg.window ** 2
    # overlap-add in n/hop interleaved passes so each pass writes disjoint spans
    stride = -(-n // hop)
    for r in range(stride):
        idx = np.arange(r, t, stride)
        if idx.size == 0:
            continue
        block = np.zeros((idx.size, stride * hop))
        block[:, :n] = frames[idx]
        start = r * hop
        span = block.reshape(-1)
        stop = min(start + span.size, total)
        y[start:stop] += span[: stop - start]
        eblock = np.zeros((idx.size, stride * hop))
        eblock[:, :n] = wsq
        env[start:stop] += eblock.reshape(-1)[: stop - start]
    y = y / np.maximum(env, ENVELOPE_FLOOR)
    pad = n // 2
    out = y[pad: total - pad]
    return Waveform(out.astype(np.float32), sample_rate)
