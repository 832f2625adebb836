"""Deterministic duration prediction and length regulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nnkit
from .errors import ShapeError
from .layout import Specs, conv_specs, norm_specs


@dataclass(frozen=True)
class DurationSeq:
    frames_per_token: tuple

    def __post_init__(self):
        if not self.frames_per_token or min(self.frames_per_token) < 1:
            raise ValueError("every token needs at least one frame")

    @property
    def total_frames(self) -> int:
        return int(sum(self.frames_per_token))

    def __len__(self):
        return len(self.frames_per_token)


def param_layout(config) -> Specs:
    d, k = config.d_model, config.dp_kernel
    p = {}
    p.update(conv_specs("conv1.", d, d, k))
    p.update(norm_specs("ln1.", d))
    p.update(conv_specs("conv2.", d, d, k))
    p.update(norm_specs("ln2.", d))
    p.update(conv_specs("proj.", 1, d, 1))
    return {"dur": p}


def predict_log_durations(hidden, weights, slot: str = "dur"):
    """conv -> relu -> norm, twice, then a 1x1 projection to one value per token."""
    p = weights.params(slot) if hasattr(weights, "params") else weights
    k = p["conv1.weight"].shape[-1]
    x = nnkit.relu(nnkit.conv1d(hidden, p["conv1.weight"], p["conv1.bias"], padding=k // 2))
    x = nnkit.layer_norm(x, p["ln1.gamma"], p["ln1.beta"])
    x = nnkit.relu(nnkit.conv1d(x, p["conv2.weight"], p["conv2.bias"], padding=k // 2))
    x = nnkit.layer_norm(x, p["ln2.gamma"], p["ln2.beta"])
    return nnkit.conv1d(x, p["proj.weight"], p["proj.bias"])[0]


def durations_to_frames(logd, length_scale: float = 1.0) -> DurationSeq:
    if not length_scale > 0:
        raise ValueError(f"length_scale must be > 0, got {length_scale}")
    logd = np.asarray(logd, dtype=np.float64)
    if not np.all(np.isfinite(logd)):
        raise ValueError("non-finite log-duration")
    raw = np.exp(logd) * length_scale
    # exp(log(n)) lands a few ulps off n; snap so ceil does not add a frame
    near = np.abs(raw - np.round(raw)) <= 1e-9 * np.maximum(1.0, raw)
    snapped = np.where(near, np.round(raw), raw)
    frames = np.maximum(1, np.ceil(snapped)).astype(np.int64)
    return DurationSeq(tuple(int(f) for f in frames))


def regulate(mean, logstd, durations: DurationSeq):
    """Repeat column ``i`` of both statistics ``d_i`` times."""
    mean = np.asarray(mean)
    logstd = np.asarray(logstd)
    if mean.shape != logstd.shape or mean.ndim != 2:
        raise ShapeError(f"mean {mean.shape} and logstd {logstd.shape} must match and be 2-D")
    if mean.shape[1] != len(durations):
        raise ShapeError(f"{mean.shape[1]} tokens but {len(durations)} durations")
    reps = np.asarray(durations.frames_per_token)
    return np.repeat(mean, reps, axis=1), np.repeat(logstd, reps, axis=1)
