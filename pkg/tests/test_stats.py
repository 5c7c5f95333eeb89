import math

import numpy as np
import pytest

from llsh import stats


def test_random_stream_deterministic():
    a = stats.RandomStream(5).child("x").generator(3).random(4)
    b = stats.RandomStream(5).child("x").generator(3).random(4)
    assert np.array_equal(a, b)


def test_random_stream_children_differ():
    base = stats.RandomStream(5)
    a = base.generator("a").random(4)
    b = base.generator("b").random(4)
    c = base.generator(0).random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_as_stream():
    s = stats.as_stream(9)
    assert isinstance(s, stats.RandomStream)
    assert stats.as_stream(s) is s


def test_boxmuller_moments():
    rng = np.random.default_rng(0)
    z = stats.normal_boxmuller(rng, 400_000)
    assert abs(z.mean()) < 4 / math.sqrt(len(z))
    assert abs(z.var() - 1.0) < 0.01
    # shape handling
    assert stats.normal_boxmuller(rng, (3, 5)).shape == (3, 5)
    assert stats.normal_boxmuller(rng, 7).shape == (7,)


def test_boxmuller_tail_weight():
    rng = np.random.default_rng(1)
    z = stats.normal_boxmuller(rng, 1_000_000)
    # P(|Z| > 3) = 0.0027
    frac = np.mean(np.abs(z) > 3)
    assert frac == pytest.approx(0.0027, abs=0.0005)


def test_wilson_halfwidth_known_value():
    # n=100, s=50: z*sqrt(p(1-p)/n + z^2/4n^2)/(1+z^2/n) = 0.09617
    half = stats.wilson_halfwidth(50, 100)
    assert half == pytest.approx(0.09617, abs=0.0001)


def test_wilson_interval_near_boundary():
    lo, hi = stats.wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < hi < 0.05
    lo, hi = stats.wilson_interval(100, 100)
    assert 0.95 < lo < 1.0
    assert hi == 1.0


def test_wilson_rejects_zero_trials():
    with pytest.raises(ValueError):
        stats.wilson_halfwidth(0, 0)


def test_estimate_from_counts():
    est = stats.Estimate.from_counts(25, 100, failures=2)
    assert est.p_hat == 0.25
    assert est.trials == 100
    assert est.failures == 2
    d = est.to_dict()
    assert d["successes"] == 25


def test_iter_blocks_covers_trials():
    blocks = list(stats.iter_blocks(10_000))
    assert sum(size for _, size in blocks) == 10_000
    assert all(size <= stats.BLOCK_SIZE for _, size in blocks)
    assert [i for i, _ in blocks] == list(range(len(blocks)))
