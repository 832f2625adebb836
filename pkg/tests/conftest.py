import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flytts.runtime.config import ModelConfig  # noqa: E402
from flytts.runtime.model import init_weights  # noqa: E402

TINY = ModelConfig(
    name="tiny", g1=2, m1=2, g2=2, m2=2,
    vocab_size=32, d_model=16, ffn_dim=32, heads=2, d_latent=8,
    flow_hidden=12, wn_layers=2, wn_kernel=5,
    d_dec=16, d_mid=48, num_decoder_blocks=2, n_fft=64, hop=16,
    ref_initial_channels=16, ref_upsample_rates=(4, 4), ref_upsample_kernels=(8, 8),
    ref_resblock_kernels=(3, 5), ref_resblock_dilations=((1, 3), (1, 3)),
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_config():
    return TINY


@pytest.fixture(scope="session")
def tiny_store():
    return init_weights(TINY, seed=7)


@pytest.fixture(scope="session")
def tiny_ref_config():
    return TINY.with_(name="tiny-ref", decoder="hifigan", hop=16)


@pytest.fixture(scope="session")
def tiny_ref_store(tiny_ref_config):
    return init_weights(tiny_ref_config, seed=7)
