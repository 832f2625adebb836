"""Training objectives as pure functions.

Reductions are arithmetic means over elements. The discriminator head
scores any ``(D_f, T_f)`` feature sequence; no feature extractor lives here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nnkit
from .errors import ShapeError
from .layout import Specs, conv_specs

HEAD_HIDDEN = 256
HEAD_LAYERS = 3


@dataclass(frozen=True)
class GaussianParams:
    mean: np.ndarray
    logstd: np.ndarray

    def __post_init__(self):
        if np.shape(self.mean) != np.shape(self.logstd):
            raise ShapeError(f"mean {np.shape(self.mean)} vs logstd {np.shape(self.logstd)}")


def gaussian_kl(q: GaussianParams, p: GaussianParams) -> float:
    """Mean elementwise KL(q || p) between diagonal Gaussians."""
    if np.shape(q.mean) != np.shape(p.mean):
        raise ShapeError(f"KL operands differ in shape: {np.shape(q.mean)} vs {np.shape(p.mean)}")
    mq, lq = np.asarray(q.mean, np.float64), np.asarray(q.logstd, np.float64)
    mp, lp = np.asarray(p.mean, np.float64), np.asarray(p.logstd, np.float64)
    var_q = np.exp(2.0 * lq)
    var_p = np.exp(2.0 * lp)
    kl = lp - lq + 0.5 * (var_q + (mq - mp) ** 2) / var_p - 0.5
    return float(np.mean(kl))


def elbo_lower_bound(log_likelihood_term: float, kl_term: float) -> float:
    if kl_term < 0:
        raise ValueError(f"KL term must be non-negative, got {kl_term}")
    return float(log_likelihood_term - kl_term)


def _scores(x, what: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError(f"{what} scores are empty")
    return a


def lsgan_discriminator_loss(real_scores, fake_scores) -> float:
    real = _scores(real_scores, "real")
    fake = _scores(fake_scores, "fake")
    return float(np.mean((real - 1.0) ** 2) + np.mean(fake ** 2))


def lsgan_generator_loss(fake_scores) -> float:
    fake = _scores(fake_scores, "fake")
    return float(np.mean((fake - 1.0) ** 2))


def head_layout(feature_dim: int, hidden: int = HEAD_HIDDEN) -> Specs:
    p = {}
    c_in = feature_dim
    for i in range(HEAD_LAYERS):
        p.update(conv_specs(f"conv{i}.", hidden, c_in, 3))
        c_in = hidden
    p.update(conv_specs("proj.", 1, hidden, 1))
    return {"head": p}


def prediction_head(features, weights, slot: str = "head") -> np.ndarray:
    """Per-frame discriminator scores from a frozen feature sequence."""
    p = weights.params(slot) if hasattr(weights, "params") else weights
    x = np.asarray(features, dtype=nnkit.DTYPE)
    if x.ndim != 2:
        raise ShapeError(f"features must be (D_f, T_f), got {x.shape}")
    for i in range(HEAD_LAYERS):
        x = nnkit.leaky_relu(nnkit.conv1d(x, p[f"conv{i}.weight"], p[f"conv{i}.bias"], padding=1))
    return nnkit.conv1d(x, p["proj.weight"], p["proj.bias"])[0]
