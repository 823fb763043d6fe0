import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adbsim.channel import (
    CHUNK_SLOTS,
    ChannelParams,
    RngStream,
    SlotRealization,
    rayleigh_from_uniform,
    sample_rayleigh_amplitude,
    sample_slot,
    sample_slots,
)
from adbsim.errors import ConfigError, DomainError


def test_uniform_one_gives_zero_amplitude():
    assert rayleigh_from_uniform(1.0, 1.0) == 0.0


def test_nonpositive_sigma_rejected():
    with pytest.raises(DomainError):
        sample_rayleigh_amplitude(RngStream(1), 0.0)
    with pytest.raises(DomainError):
        rayleigh_from_uniform(0.5, -1.0)


def test_scalar_draw_is_float():
    x = sample_rayleigh_amplitude(RngStream(3), 1.0)
    assert isinstance(x, float) and x >= 0


def test_power_mean_and_survival():
    x = sample_rayleigh_amplitude(RngStream(11), 1.0, size=10**6)
    p = x * x
    assert abs(p.mean() / 2.0 - 1) < 0.01
    assert abs((p >= 2.0).mean() - math.exp(-1)) < 0.01


@pytest.mark.parametrize("sigma2", [0.25, 1.0, 3.0])
def test_power_law_sup_distance(sigma2):
    p = np.sort(sample_rayleigh_amplitude(RngStream(5, 2), sigma2, size=10**6) ** 2)
    n = p.size
    cdf = -np.expm1(-p / (2 * sigma2))
    d = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    assert d <= 0.005


def test_slot_shapes_l1():
    s = sample_slot(ChannelParams(1), RngStream(0), 0)
    assert s.g.shape == (1,) and s.h.shape == (1,)


def test_slot_replay():
    params = ChannelParams(4)
    a = sample_slot(params, RngStream(9, 1), 12345)
    b = sample_slot(params, RngStream(9, 1), 12345)
    np.testing.assert_array_equal(a.g, b.g)
    np.testing.assert_array_equal(a.h, b.h)


def test_slot_addressing_consistent_across_chunks():
    params = ChannelParams(3)
    stream = RngStream(4)
    start = CHUNK_SLOTS - 5
    g, h = sample_slots(params, stream, start, 10)
    for j in (0, 4, 5, 9):
        s = sample_slot(params, stream, start + j)
        np.testing.assert_array_equal(s.g, g[j])
        np.testing.assert_array_equal(s.h, h[j])


def test_per_relay_power_means():
    g, h = sample_slots(ChannelParams(4), RngStream(21), 0, 10**5)
    np.testing.assert_allclose((g * g).mean(axis=0), 2.0, rtol=0.03)
    np.testing.assert_allclose((h * h).mean(axis=0), 2.0, rtol=0.03)


def test_variances_apply_per_hop():
    g, h = sample_slots(ChannelParams(2, sigma_g2=0.5, sigma_h2=2.0), RngStream(8), 0, 10**5)
    assert abs((g * g).mean() - 1.0) < 0.02
    assert abs((h * h).mean() - 4.0) < 0.08


def test_independence_proxy():
    g, h = sample_slots(ChannelParams(3), RngStream(33), 0, 10**6)
    c = np.corrcoef(np.column_stack([g, h]).T)
    off = c[~np.eye(6, dtype=bool)]
    assert np.abs(off).max() <= 0.01


def test_stream_disjointness():
    a = sample_rayleigh_amplitude(RngStream(7, 0), 1.0, size=10**6)
    b = sample_rayleigh_amplitude(RngStream(7, 1), 1.0, size=10**6)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 0.01


@given(st.integers(0, 2**64 - 1), st.integers(0, 1000), st.integers(0, 10**7))
@settings(max_examples=25, deadline=None)
def test_draws_deterministic_and_nonnegative(seed, stream_id, slot):
    params = ChannelParams(2)
    a = sample_slot(params, RngStream(seed, stream_id), slot)
    b = sample_slot(params, RngStream(seed, stream_id), slot)
    assert (a.g >= 0).all() and (a.h >= 0).all()
    assert np.array_equal(a.g, b.g) and np.array_equal(a.h, b.h)


def test_invalid_params():
    with pytest.raises(ConfigError):
        ChannelParams(0)
    with pytest.raises(ConfigError):
        ChannelParams(2, sigma_g2=0)
    with pytest.raises(ConfigError):
        ChannelParams(2, n0=2.0)
    with pytest.raises(ConfigError):
        RngStream(-1)
    with pytest.raises(DomainError):
        SlotRealization([1.0, -1.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        SlotRealization([1.0], [1.0, 2.0])
