"""16-bit PCM mono WAV output."""

from __future__ import annotations

import io
import wave

import numpy as np

from ..spectral import Waveform


def to_pcm16(samples) -> np.ndarray:
    x = np.nan_to_num(np.asarray(samples, dtype=np.float64), nan=0.0, posinf=1.0, neginf=-1.0)
    return np.round(np.clip(x, -1.0, 1.0) * 32767.0).astype("<i2")


def wav_bytes(wav: Waveform) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(wav.sample_rate)
        w.writeframes(to_pcm16(wav.samples).tobytes())
    return buf.getvalue()


def write_wav(path, wav: Waveform) -> None:
    with open(path, "wb") as f:
        f.write(wav_bytes(wav))


def read_wav(path) -> Waveform:
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1 or w.getsampwidth() != 2:
            raise ValueError("expected 16-bit mono PCM")
        raw = w.readframes(w.getnframes())
        rate = w.getframerate()
    return Waveform(np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32767.0, rate)
