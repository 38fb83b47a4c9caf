import numpy as np
import pytest
from scipy import stats

from glv_econ import stochastic
from glv_econ.stochastic import Channel, StreamKey


def test_zero_sd_returns_mean():
    key = StreamKey(seed=3, agent_index=7, iteration=11, channel=Channel.TRAIT_INIT)
    assert stochastic.sample_normal(key, 100.0, 0.0) == 100.0
    assert stochastic.sample_truncated_normal(key, 0.2, 0.0, 0.001) == 0.2


def test_same_key_same_value():
    key = StreamKey(seed=42, agent_index=5, iteration=9, channel=Channel.CONSUMPTION_DRAW)
    assert stochastic.sample_normal(key, 0, 1) == stochastic.sample_normal(key, 0, 1)
    assert stochastic.sample_uniform(key) == stochastic.sample_uniform(key)


def test_scalar_and_block_agree():
    base = stochastic.agent_hashes(5, Channel.CONSUMPTION_DRAW, np.arange(20))
    block = stochastic.normal_block(base, 4, 1.0, 2.0)
    for i in (0, 7, 19):
        key = StreamKey(seed=5, agent_index=i, iteration=4, channel=Channel.CONSUMPTION_DRAW)
        assert stochastic.sample_normal(key, 1.0, 2.0) == block[i]


def test_each_key_field_changes_the_draw():
    key = StreamKey(seed=1, agent_index=2, iteration=3, channel=Channel.CONSUMPTION_DRAW)
    ref = stochastic.sample_normal(key, 0, 1)
    for changed in (StreamKey(2, 2, 3, Channel.CONSUMPTION_DRAW), StreamKey(1, 3, 3, Channel.CONSUMPTION_DRAW),
                    StreamKey(1, 2, 4, Channel.CONSUMPTION_DRAW), StreamKey(1, 2, 3, Channel.TRAIT_INIT)):
        assert stochastic.sample_normal(changed, 0, 1) != ref


def test_million_draws_moments():
    # sd of the sample mean is 1e-3, so +-0.005 is a 5 sigma band
    base = stochastic.agent_hashes(2024, Channel.CONSUMPTION_DRAW, np.arange(1_000_000))
    z = stochastic.standard_normal_block(base, 0)
    assert abs(z.mean()) < 0.005
    assert abs(z.std() - 1.0) < 0.005
    assert stats.kstest(z[:100_000], "norm").pvalue > 1e-4


def test_uniform_range():
    base = stochastic.agent_hashes(1, Channel.TRAIT_INIT, np.arange(10))
    u = [stochastic.sample_uniform(StreamKey(1, i, 0, Channel.TRAIT_INIT)) for i in range(200)]
    assert min(u) >= 0.0 and max(u) < 1.0
    assert base.dtype == np.uint64


def test_truncated_draws_respect_floor():
    base = stochastic.agent_hashes(9, Channel.TRAIT_INIT, np.arange(50_000))
    x = stochastic.truncated_normal_block(base, 1, 0.2, 0.2, 0.001)
    assert x.min() >= 0.001


def test_truncation_matches_rejection_oracle():
    mean, sd, lo = 1.0, 1.0 / 3.0, 0.5
    base = stochastic.agent_hashes(77, Channel.CONSUMPTION_DRAW, np.arange(200_000))
    x = stochastic.truncated_normal_block(base, 0, mean, sd, lo)
    # brute force: keep resampling a plain normal until it clears the floor
    rng = np.random.default_rng(0)
    ref = rng.normal(mean, sd, 600_000)
    ref = ref[ref >= lo][:200_000]
    exact = stats.truncnorm((lo - mean) / sd, np.inf, loc=mean, scale=sd).mean()
    assert x.mean() == pytest.approx(exact, abs=5e-3)
    assert x.mean() == pytest.approx(ref.mean(), abs=5e-3)
    assert stats.ks_2samp(x, ref).pvalue > 1e-4


def test_floor_above_mean_is_rejected():
    base = stochastic.agent_hashes(0, Channel.TRAIT_INIT, np.arange(3))
    with pytest.raises(ValueError):
        stochastic.truncated_normal_block(base, 0, 0.1, 0.1, 0.2)
