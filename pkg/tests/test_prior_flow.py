import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from flytts import prior_flow as pf
from flytts.errors import ShapeError
from flytts.runtime.config import preset_config
from flytts.runtime.model import init_weights
from flytts.runtime.weights import WeightStore


def latent(rng, config, t):
    return rng.standard_normal((config.d_latent, t)).astype(np.float32)


def zero_shift_params(store, k=0):
    p = pf.step_params(store, k)
    return {**p, "post": {n: np.zeros_like(v) for n, v in p["post"].items()}}


class TestCoupling:
    def test_zero_shift_is_identity(self, rng, tiny_config, tiny_store):
        x = latent(rng, tiny_config, 20)
        p = zero_shift_params(tiny_store)
        for direction in (pf.FORWARD, pf.INVERSE):
            assert np.array_equal(pf.coupling_step(x, p, tiny_config, direction), x)

    def test_first_half_untouched(self, rng, tiny_config, tiny_store):
        x = latent(rng, tiny_config, 13)
        y = pf.coupling_step(x, pf.step_params(tiny_store, 1), tiny_config, pf.FORWARD)
        half = tiny_config.d_latent // 2
        assert np.array_equal(y[:half], x[:half])
        assert not np.array_equal(y[half:], x[half:])

    def test_round_trip(self, rng, tiny_config, tiny_store):
        x = latent(rng, tiny_config, 31)
        p = pf.step_params(tiny_store, 2)
        y = pf.coupling_step(x, p, tiny_config, pf.FORWARD)
        np.testing.assert_allclose(pf.coupling_step(y, p, tiny_config, pf.INVERSE), x, atol=1e-5)

    def test_odd_channels_rejected(self, rng, tiny_config, tiny_store):
        with pytest.raises(ShapeError, match="even"):
            pf.coupling_step(rng.standard_normal((7, 5)), pf.step_params(tiny_store, 0), tiny_config)

    def test_vs_oracle(self, rng, tiny_config, tiny_store):
        cfg = tiny_config
        x = latent(rng, cfg, 9)
        p = pf.step_params(tiny_store, 3)
        half, hid = cfg.d_latent // 2, cfg.flow_hidden
        h = oracles.conv1d(x[:half], p["pre"]["weight"], p["pre"]["bias"])
        skip = np.zeros_like(h)
        wn = p["wn"]
        for i in range(cfg.wn_layers):
            a = oracles.conv1d(h, wn[f"in{i}.weight"], wn[f"in{i}.bias"], padding=2)
            acts = np.tanh(a[:hid]) / (1 + np.exp(-a[hid:]))
            rs = oracles.conv1d(acts, wn[f"res_skip{i}.weight"], wn[f"res_skip{i}.bias"])
            if i < cfg.wn_layers - 1:
                h, skip = h + rs[:hid], skip + rs[hid:]
            else:
                skip = skip + rs
        shift = oracles.conv1d(skip, p["post"]["weight"], p["post"]["bias"])
        y = pf.coupling_step(x, p, cfg, pf.FORWARD)
        np.testing.assert_allclose(y[half:], x[half:] + shift, atol=1e-5)

    def test_logdet_is_zero(self):
        assert pf.coupling_logdet() == 0.0
        assert pf.flow_logdet(None, pf.FlowPlan(2, 2)) == 0.0


class TestFlowApply:
    def test_round_trip(self, rng, tiny_config, tiny_store):
        z = latent(rng, tiny_config, 40)
        plan = pf.FlowPlan.from_config(tiny_config)
        fwd = pf.flow_apply(z, plan, tiny_store, tiny_config, pf.FORWARD)
        back = pf.flow_apply(fwd, plan, tiny_store, tiny_config, pf.INVERSE)
        assert np.abs(back - z).max() < 1e-5
        assert not np.allclose(fwd, z)

    def test_flip_involution(self, rng):
        x = rng.standard_normal((6, 4)).astype(np.float32)
        assert np.array_equal(pf.flip(pf.flip(x)), x)
        assert np.array_equal(pf.flip(x)[0], x[-1])

    @pytest.mark.parametrize("preset, wn, own", [("fly-tts", 2, 8), ("mini-fly-tts", 1, 8),
                                                 ("vits-base-shaped", 4, 8)])
    def test_storage_counts(self, preset, wn, own):
        cfg = preset_config(preset)
        specs, aliases = pf.param_layout(cfg)
        store = WeightStore({s: {n: np.zeros(1) for n in t} for s, t in specs.items()}, aliases)
        assert cfg.flow_steps == 4
        assert store.distinct_storages(pf.wn_slot(k) for k in range(4)) == wn
        own_slots = [f"flow.step{k}.{p}" for k in range(4) for p in ("pre", "post")]
        assert store.distinct_storages(own_slots) == own

    def test_layout_mismatch(self, rng, tiny_config, tiny_store):
        with pytest.raises(ShapeError):
            pf.flow_apply(latent(rng, tiny_config, 5), pf.FlowPlan(1, 4), tiny_store, tiny_config)

    def test_conditioning_rejected(self, rng, tiny_config, tiny_store):
        with pytest.raises(ValueError, match="single-speaker"):
            pf.flow_apply(latent(rng, tiny_config, 5), pf.FlowPlan(2, 2), tiny_store, tiny_config,
                          cond=np.zeros(3))

    def test_shared_wavenet_perturbation(self, rng, tiny_config, tiny_store):
        """Bumping one shared WaveNet changes every step that aliases it."""
        cfg = tiny_config
        x = latent(rng, cfg, 12)
        wn0 = tiny_store.resolve(pf.wn_slot(0))
        bumped = {k: v + 0.1 if k == "in0.bias" else v for k, v in tiny_store.storages[wn0].items()}
        store2 = tiny_store.replace(wn0, bumped)
        for k in range(cfg.flow_steps):
            a = pf.coupling_step(x, pf.step_params(tiny_store, k), cfg)
            b = pf.coupling_step(x, pf.step_params(store2, k), cfg)
            shares = tiny_store.resolve(pf.wn_slot(k)) == wn0
            assert (not np.array_equal(a, b)) == shares


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), t=st.integers(1, 256))
def test_invertibility_property(tiny_config, seed, t):
    store = init_weights(tiny_config, seed)
    z = np.random.default_rng(seed).standard_normal((tiny_config.d_latent, t)).astype(np.float32) * 3
    plan = pf.FlowPlan.from_config(tiny_config)
    y = pf.flow_apply(z, plan, store, tiny_config, pf.FORWARD)
    assert np.abs(pf.flow_apply(y, plan, store, tiny_config, pf.INVERSE) - z).max() < 1e-4
