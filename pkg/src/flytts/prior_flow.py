"""Mean-only coupling flow with grouped sharing of the WaveNet projection.

Each of the ``K = g * m`` steps owns its pre/post 1x1 convolutions; the
WaveNet stack between them is shared by the ``m`` steps of a group. A channel
reversal follows every step. Translation-only coupling keeps the
log-determinant at exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nnkit
from .errors import ShapeError
from .layout import Aliases, Specs, conv_specs

FORWARD = "forward"
INVERSE = "inverse"


@dataclass(frozen=True)
class FlowPlan:
    groups: int
    steps_per_group: int
    flip: bool = True

    def __post_init__(self):
        if self.groups < 1 or self.steps_per_group < 1:
            raise ValueError(f"flow plan needs positive g and m, got {self}")

    @property
    def steps(self) -> int:
        return self.groups * self.steps_per_group

    @classmethod
    def from_config(cls, config) -> "FlowPlan":
        return cls(config.g2, config.m2)


def wn_slot(k: int) -> str:
    return f"flow.step{k}.wn"


def wn_storage(j: int) -> str:
    return f"flow.wn{j}"


def param_layout(config) -> tuple[Specs, Aliases]:
    half, hid, kern, n = config.d_latent // 2, config.flow_hidden, config.wn_kernel, config.wn_layers
    plan = FlowPlan.from_config(config)
    wn = {}
    for i in range(n):
        wn.update(conv_specs(f"in{i}.", 2 * hid, hid, kern))
        out_ch = 2 * hid if i < n - 1 else hid
        wn.update(conv_specs(f"res_skip{i}.", out_ch, hid, 1))
    specs: Specs = {}
    for j in range(plan.groups):
        specs[wn_storage(j)] = dict(wn)
    for k in range(plan.steps):
        specs[f"flow.step{k}.pre"] = conv_specs("", hid, half, 1)
        specs[f"flow.step{k}.post"] = conv_specs("", half, hid, 1)
    aliases = {wn_slot(k): wn_storage(k // plan.steps_per_group) for k in range(plan.steps)}
    return specs, aliases


def wavenet(h, p, n_layers: int, kernel: int, dilation_rate: int = 1):
    """Gated dilated-conv stack with residual and skip paths."""
    hid = h.shape[0]
    x = h.astype(np.float64)
    skip = np.zeros_like(x)
    for i in range(n_layers):
        dil = dilation_rate ** i
        pad = (kernel * dil - dil) // 2
        a = nnkit.conv1d(x.astype(nnkit.DTYPE), p[f"in{i}.weight"], p[f"in{i}.bias"],
                         padding=pad, dilation=dil).astype(np.float64)
        acts = np.tanh(a[:hid]) * (1.0 / (1.0 + np.exp(-a[hid:])))
        rs = nnkit.conv1d(acts.astype(nnkit.DTYPE), p[f"res_skip{i}.weight"],
                          p[f"res_skip{i}.bias"]).astype(np.float64)
        if i < n_layers - 1:
            x = x + rs[:hid]
            skip = skip + rs[hid:]
        else:
            skip = skip + rs
    return skip.astype(nnkit.DTYPE)


def coupling_shift(x_a, pre, wn, post, config):
    h = nnkit.conv1d(x_a, pre["weight"], pre["bias"])
    h = wavenet(h, wn, config.wn_layers, config.wn_kernel)
    return nnkit.conv1d(h, post["weight"], post["bias"])


def coupling_step(x, params: dict, config, direction: str = FORWARD):
    """One mean-only coupling step.

    ``params`` carries ``pre``, ``wn`` and ``post`` parameter sets. The first
    channel half passes through untouched; the second is shifted by a
    function of the first (added going forward, subtracted going back).
    """
    x = np.asarray(x, dtype=nnkit.DTYPE)
    if x.ndim != 2 or x.shape[0] % 2:
        raise ShapeError(f"coupling needs an even channel count, got shape {x.shape}")
    half = x.shape[0] // 2
    x_a, x_b = x[:half], x[half:]
    shift = coupling_shift(x_a, params["pre"], params["wn"], params["post"], config)
    if direction == FORWARD:
        y_b = x_b.astype(np.float64) + shift
    elif direction == INVERSE:
        y_b = x_b.astype(np.float64) - shift
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return np.concatenate([x_a, y_b.astype(nnkit.DTYPE)], axis=0)


def coupling_logdet(x=None) -> float:
    # translation only: the Jacobian is unit lower-triangular
    return 0.0


def flip(x):
    return np.ascontiguousarray(x[::-1])


def check_plan(weights, plan: FlowPlan) -> None:
    wn = [weights.resolve(wn_slot(k)) for k in range(plan.steps)]
    if len(set(wn)) != plan.groups:
        raise ShapeError(f"flow plan wants {plan.groups} WaveNet sets, store has {len(set(wn))}")
    for k, s in enumerate(wn):
        if s != wn[(k // plan.steps_per_group) * plan.steps_per_group]:
            raise ShapeError(f"{wn_slot(k)} is not aliased to its group's WaveNet")
    own = {weights.resolve(f"flow.step{k}.{part}") for k in range(plan.steps) for part in ("pre", "post")}
    if len(own) != 2 * plan.steps:
        raise ShapeError("flow pre/post convolutions must have independent storage per step")


def step_params(weights, k: int) -> dict:
    return {
        "pre": weights.params(f"flow.step{k}.pre"),
        "wn": weights.params(wn_slot(k)),
        "post": weights.params(f"flow.step{k}.post"),
    }


def flow_apply(z, plan: FlowPlan, weights, config, direction: str = INVERSE, cond=None):
    """Run all ``K`` steps; ``inverse`` undoes ``forward`` step by step in reverse.

    Synthesis uses the inverse direction, mapping a prior sample to the
    decoder latent. ``cond`` is reserved for speaker conditioning and must be
    None.
    """
    if cond is not None:
        raise ValueError("global conditioning is not supported (single-speaker engine)")
    if direction not in (FORWARD, INVERSE):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    check_plan(weights, plan)
    x = np.asarray(z, dtype=nnkit.DTYPE)
    if direction == FORWARD:
        for k in range(plan.steps):
            x = coupling_step(x, step_params(weights, k), config, FORWARD)
            if plan.flip:
                x = flip(x)
    else:
        for k in reversed(range(plan.steps)):
            if plan.flip:
                x = flip(x)
            x = coupling_step(x, step_params(weights, k), config, INVERSE)
    return x


def flow_logdet(z, plan: FlowPlan) -> float:
    return sum(coupling_logdet() for _ in range(plan.steps))
