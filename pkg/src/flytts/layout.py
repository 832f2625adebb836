"""Declarative parameter layouts.

Each network module describes its tensors as ``{storage: {tensor: TensorSpec}}``
plus an alias table mapping layer slots onto storages. The runtime turns a
layout into a populated :class:`~flytts.runtime.weights.WeightStore`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np


@dataclass(frozen=True)
class TensorSpec:
    shape: Tuple[int, ...]
    init: str = "uniform"  # uniform | normal | ones | zeros | const
    fan_in: int = 1
    value: float = 0.0

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))


Specs = Dict[str, Dict[str, TensorSpec]]
Aliases = Dict[str, str]


def conv_specs(prefix: str, c_out: int, c_in: int, k: int) -> Dict[str, TensorSpec]:
    fan_in = c_in * k
    return {
        f"{prefix}weight": TensorSpec((c_out, c_in, k), "uniform", fan_in),
        f"{prefix}bias": TensorSpec((c_out,), "uniform", fan_in),
    }


def norm_specs(prefix: str, c: int) -> Dict[str, TensorSpec]:
    return {
        f"{prefix}gamma": TensorSpec((c,), "ones"),
        f"{prefix}beta": TensorSpec((c,), "zeros"),
    }


def spec_count(specs: Specs) -> int:
    return sum(t.size for group in specs.values() for t in group.values())
