"""Architecture hyperparameters and the three named presets."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Tuple


@dataclass(frozen=True)
class ModelConfig:
    name: str = "fly-tts"
    # grouped sharing: encoder has g1*m1 layers, flow has g2*m2 coupling steps
    g1: int = 2
    m1: int = 3
    g2: int = 2
    m2: int = 2
    # text encoder
    vocab_size: int = 256
    d_model: int = 192
    ffn_dim: int = 768
    ffn_kernel: int = 3
    heads: int = 2
    d_latent: int = 192
    # flow
    flow_hidden: int = 192
    wn_layers: int = 4
    wn_kernel: int = 5
    # duration predictor
    dp_kernel: int = 3
    # decoder: "convnext" (iSTFT head) or "hifigan" (transposed-conv reference)
    decoder: str = "convnext"
    d_dec: int = 512
    d_mid: int = 1536
    num_decoder_blocks: int = 6
    n_fft: int = 1024
    hop: int = 256
    clip_max: float = math.log(1e2)
    # reference decoder
    ref_initial_channels: int = 512
    ref_upsample_rates: Tuple[int, ...] = (8, 8, 2, 2)
    ref_upsample_kernels: Tuple[int, ...] = (16, 16, 4, 4)
    ref_resblock_kernels: Tuple[int, ...] = (3, 7, 11)
    ref_resblock_dilations: Tuple[Tuple[int, ...], ...] = ((1, 3, 5), (1, 3, 5), (1, 3, 5))
    sample_rate: int = 22050

    def __post_init__(self):
        ints = [f.name for f in fields(self) if f.type in ("int", int)]
        bad = [n for n in ints if getattr(self, n) <= 0]
        if bad:
            raise ValueError(f"config fields must be positive: {', '.join(bad)}")
        if self.n_fft & (self.n_fft - 1):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if self.hop > self.n_fft // 2:
            raise ValueError(f"hop {self.hop} exceeds n_fft/2 = {self.n_fft // 2}")
        if self.d_model % self.heads:
            raise ValueError(f"d_model {self.d_model} not divisible by heads {self.heads}")
        if self.d_latent % 2:
            raise ValueError(f"d_latent must be even, got {self.d_latent}")
        if self.decoder not in ("convnext", "hifigan"):
            raise ValueError(f"unknown decoder kind {self.decoder!r}")
        if len(self.ref_upsample_rates) != len(self.ref_upsample_kernels):
            raise ValueError("reference upsample rates/kernels length mismatch")
        if len(self.ref_resblock_kernels) != len(self.ref_resblock_dilations):
            raise ValueError("reference resblock kernels/dilations length mismatch")

    @property
    def encoder_layers(self) -> int:
        return self.g1 * self.m1

    @property
    def flow_steps(self) -> int:
        return self.g2 * self.m2

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def ref_upsample_factor(self) -> int:
        return math.prod(self.ref_upsample_rates)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ref_upsample_rates"] = list(self.ref_upsample_rates)
        d["ref_upsample_kernels"] = list(self.ref_upsample_kernels)
        d["ref_resblock_kernels"] = list(self.ref_resblock_kernels)
        d["ref_resblock_dilations"] = [list(x) for x in self.ref_resblock_dilations]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("ref_upsample_rates", "ref_upsample_kernels", "ref_resblock_kernels"):
            if key in d:
                d[key] = tuple(d[key])
        if "ref_resblock_dilations" in d:
            d["ref_resblock_dilations"] = tuple(tuple(x) for x in d["ref_resblock_dilations"])
        return cls(**d)

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)


PRESETS = {
    "vits-base-shaped": ModelConfig(
        name="vits-base-shaped", g1=6, m1=1, g2=4, m2=1, decoder="hifigan"),
    "fly-tts": ModelConfig(name="fly-tts", g1=2, m1=3, g2=2, m2=2, num_decoder_blocks=6),
    "mini-fly-tts": ModelConfig(name="mini-fly-tts", g1=1, m1=6, g2=1, m2=4, num_decoder_blocks=4),
}


def preset_config(name: str) -> ModelConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
