"""Inference engine and performance lab for a fast, lightweight VITS-style TTS model.

Text encoder and prior flow use grouped parameter sharing; the decoder is a
ConvNeXt stack emitting Fourier coefficients that an iSTFT turns into audio.
"""

from .runtime.config import ModelConfig, preset_config
from .runtime.model import init_weights
from .runtime.pipeline import measure_rtf, synthesize
from .runtime.weights import WeightStore, count_parameters, load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "WeightStore",
    "count_parameters",
    "init_weights",
    "load_weights",
    "measure_rtf",
    "preset_config",
    "save_weights",
    "synthesize",
]
