"""Shared fixtures: seeded signals and a tiny model configuration.

The tiny configuration keeps every dimension small enough that brute-force
oracles (python loops, float64) stay fast while still exercising multi-head
attention and multiple layers.
"""

import numpy as np
import pytest

from latentvc import ConverterConfig, Waveform, init_params


TINY = dict(
    d_latent=6, d_cond=4, d_spk=3, d_model=8,
    n_layers=2, n_heads=2, d_head=4, ffn_ratio=2,
)


@pytest.fixture
def tiny_cfg():
    return ConverterConfig(**TINY)


@pytest.fixture
def tiny_params(tiny_cfg):
    """Tiny config with random nonzero weights (not the zero-gate init)."""
    rng = np.random.default_rng(123)
    params = init_params(tiny_cfg, seed=0)
    for name in params.tensors:
        params.tensors[name] = rng.standard_normal(
            params.tensors[name].shape).astype(np.float32) * 0.1
    return params


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def make_wave(n, seed=0, amp=0.3):
    r = np.random.default_rng(seed)
    return Waveform(amp * r.standard_normal(n))


@pytest.fixture
def short_wave():
    return make_wave(8000, seed=11)
