"""End-to-end synthesis and the real-time-factor benchmark."""

from __future__ import annotations

import os
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .. import decoder, duration, prior_flow, spectral, text_encoder
from ..spectral import StftConfig, Waveform
from .config import ModelConfig
from .reference import reference_decode

DEFAULT_NOISE_SCALE = 0.667
DEFAULT_LENGTH_SCALE = 1.0
STAGES = ("encoder", "flow", "decoder", "istft")
# average CPU real-time factors reported for the original systems
PUBLISHED_RTF_CPU = {"vits-base": 0.1221, "fly-tts": 0.0139}


@dataclass
class SynthesisTrace:
    waveform: Waveform
    durations: duration.DurationSeq
    timings: dict = field(default_factory=dict)


def _check_store(store, config: ModelConfig) -> None:
    stored = store.meta.get("config")
    if stored is not None and stored != config.to_dict():
        raise ValueError(
            f"weight store was built for preset {stored.get('name')!r}, not {config.name!r}")


def run_pipeline(tokens, store, config: ModelConfig, noise_scale: float = DEFAULT_NOISE_SCALE,
                 length_scale: float = DEFAULT_LENGTH_SCALE, seed: int = 0,
                 clock: Callable[[], float] = time.perf_counter) -> SynthesisTrace:
    """Synthesize and keep the durations and per-stage wall times."""
    ids = np.asarray(tokens, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("cannot synthesize an empty token sequence")
    _check_store(store, config)
    timings = {}

    t0 = clock()
    enc = text_encoder.encode_text(ids, store, text_encoder.SharingPlan.from_config(config), config)
    logd = duration.predict_log_durations(enc.hidden, store)
    durs = duration.durations_to_frames(logd, length_scale)
    mean, logstd = duration.regulate(enc.prior_mean, enc.prior_logstd, durs)
    if mean.shape[1] != durs.total_frames:
        raise RuntimeError("length regulation lost frames")
    eps = np.random.default_rng(seed).standard_normal(mean.shape)
    z_p = (mean.astype(np.float64)
           + noise_scale * np.exp(logstd.astype(np.float64)) * eps).astype(np.float32)
    t1 = clock()
    timings["encoder"] = t1 - t0

    z = prior_flow.flow_apply(z_p, prior_flow.FlowPlan.from_config(config), store, config,
                              prior_flow.INVERSE)
    t2 = clock()
    timings["flow"] = t2 - t1

    if config.decoder == "convnext":
        spec = decoder.decode_spectrum(z, store, config)
        t3 = clock()
        wav = spectral.istft(spec, StftConfig(config.n_fft, config.hop), config.sample_rate)
        t4 = clock()
        timings["decoder"] = t3 - t2
        timings["istft"] = t4 - t3
    else:
        wav = reference_decode(z, store, config)
        timings["decoder"] = clock() - t2
        timings["istft"] = 0.0
    return SynthesisTrace(wav, durs, timings)


def synthesize(tokens, store, config: ModelConfig, noise_scale: float = DEFAULT_NOISE_SCALE,
               length_scale: float = DEFAULT_LENGTH_SCALE, seed: int = 0) -> Waveform:
    return run_pipeline(tokens, store, config, noise_scale, length_scale, seed).waveform


@dataclass
class RtfReport:
    audio_seconds: float
    wall_seconds: float
    rtf: float
    rtf_median: float
    repeats: int
    warmups: int
    stages: dict
    environment: dict
    preset: str = ""
    published_reference: dict = field(default_factory=lambda: dict(PUBLISHED_RTF_CPU))
    extra: dict = field(default_factory=dict)

    def lines(self) -> list:
        out = [
            f"# published CPU RTF reference: VITS-base {PUBLISHED_RTF_CPU['vits-base']}, "
            f"FLY-TTS {PUBLISHED_RTF_CPU['fly-tts']}",
            f"preset        {self.preset}",
            f"repeats       {self.repeats} (warmups {self.warmups})",
            f"audio_seconds {self.audio_seconds:.4f}",
            f"wall_seconds  {self.wall_seconds:.4f}",
            f"rtf_mean      {self.rtf:.5f}",
            f"rtf_median    {self.rtf_median:.5f}",
        ]
        for name in STAGES:
            out.append(f"stage.{name:<8s} {self.stages.get(name, 0.0):.4f} s")
        for k, v in self.extra.items():
            out.append(f"{k:<13s} {v:.5f}" if isinstance(v, float) else f"{k:<13s} {v}")
        return out

    def to_dict(self) -> dict:
        return asdict(self)


def rtf_from_timings(walls: Sequence[float], audio_seconds: float) -> float:
    if audio_seconds <= 0:
        raise ValueError("audio duration must be positive")
    return statistics.fmean(walls) / audio_seconds


def environment_info() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "cpu_count": os.cpu_count(),
        "threads": 1,
    }


def measure_rtf(config: ModelConfig, store, tokens, repeats: int = 5, warmups: int = 3,
                noise_scale: float = DEFAULT_NOISE_SCALE, length_scale: float = DEFAULT_LENGTH_SCALE,
                seed: int = 0, clock: Callable[[], float] = time.perf_counter) -> RtfReport:
    """Time ``synthesize`` single-threaded; warmup runs are discarded."""
    if repeats < 1 or warmups < 0:
        raise ValueError(f"need repeats >= 1 and warmups >= 0, got {repeats}, {warmups}")
    walls, stage_runs = [], []
    audio_seconds: Optional[float] = None
    with threadpool_limits(limits=1):
        for i in range(warmups + repeats):
            start = clock()
            trace = run_pipeline(tokens, store, config, noise_scale, length_scale, seed, clock=clock)
            wall = clock() - start
            if trace.waveform.samples.size == 0:
                raise ValueError("synthesis produced no samples")
            audio_seconds = trace.waveform.seconds
            if i >= warmups:
                walls.append(wall)
                stage_runs.append(trace.timings)
    stages = {s: statistics.fmean(r[s] for r in stage_runs) for s in STAGES}
    return RtfReport(
        audio_seconds=audio_seconds,
        wall_seconds=statistics.fmean(walls),
        rtf=rtf_from_timings(walls, audio_seconds),
        rtf_median=statistics.median(walls) / audio_seconds,
        repeats=repeats,
        warmups=warmups,
        stages=stages,
        environment=environment_info(),
        preset=config.name,
    )


def time_decoders(config: ModelConfig, store, ref_store, ref_config: ModelConfig, frames: int,
                  repeats: int = 3, seed: int = 0) -> dict:
    """Single-threaded wall time of the iSTFT decoder vs the reference on one latent."""
    z = np.random.default_rng(seed).standard_normal((config.d_latent, frames)).astype(np.float32)
    fast, slow = [], []
    with threadpool_limits(limits=1):
        decoder.decode(z, store, config)
        for _ in range(repeats):
            t = time.perf_counter()
            decoder.decode(z, store, config)
            fast.append(time.perf_counter() - t)
            t = time.perf_counter()
            reference_decode(z, ref_store, ref_config)
            slow.append(time.perf_counter() - t)
    fast_s, slow_s = statistics.median(fast), statistics.median(slow)
    return {"frames": frames, "decoder_seconds": fast_s, "reference_seconds": slow_s,
            "speedup": slow_s / fast_s}
