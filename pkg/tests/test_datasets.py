"""Tests for bundled fixtures and the robust mode estimator."""

from __future__ import annotations

import numpy as np
import pytest

from priorimpact import (
    SKEWED_DEMO_SEED,
    ValidationError,
    bioassay,
    half_sample_mode,
    skewed_demo_sample,
)


class TestBioassayFixture:
    def test_shape_and_values(self):
        b = bioassay()
        assert np.array_equal(b.log_doses, (-0.863, -0.296, -0.053, 0.727))
        assert np.array_equal(b.trials, (5, 5, 5, 5))
        assert np.array_equal(b.deaths, (0, 1, 3, 5))

    def test_deaths_never_exceed_trials(self):
        b = bioassay()
        assert all(0 <= d <= t for d, t in zip(b.deaths, b.trials))


class TestSkewedDemoSample:
    def test_deterministic_and_sized(self):
        a = skewed_demo_sample()
        b = skewed_demo_sample()
        assert a.shape == (50,)
        assert np.array_equal(a, b)
        c = skewed_demo_sample(seed=SKEWED_DEMO_SEED + 1)
        assert not np.array_equal(a, c)

    def test_right_skewed(self):
        a = skewed_demo_sample(size=50)
        assert a.mean() > np.median(a) - 0.05
        assert float(np.mean(((a - a.mean()) / a.std()) ** 3)) > 0.2

    def test_custom_size(self):
        assert skewed_demo_sample(size=150).shape == (150,)


class TestHalfSampleMode:
    def test_single_and_pair(self):
        assert half_sample_mode([3.0]) == 3.0
        assert half_sample_mode([2.0, 4.0]) == 3.0

    def test_finds_the_dense_region(self):
        rng = np.random.default_rng(0)
        values = np.concatenate([rng.normal(5.0, 0.1, 300), rng.uniform(0, 50, 60)])
        assert abs(half_sample_mode(values) - 5.0) < 0.2

    def test_robust_to_an_escaping_tail(self):
        rng = np.random.default_rng(1)
        clean = rng.normal(3.0, 0.5, 400)
        contaminated = np.concatenate([clean, np.full(40, 1e6)])
        assert abs(half_sample_mode(contaminated) - half_sample_mode(clean)) < 0.5

    def test_order_invariance(self):
        rng = np.random.default_rng(2)
        values = rng.gamma(3.0, 1.0, 257)
        shuffled = values.copy()
        rng.shuffle(shuffled)
        assert half_sample_mode(values) == pytest.approx(half_sample_mode(shuffled))

    def test_validation(self):
        with pytest.raises(ValidationError):
            half_sample_mode([])
        with pytest.raises(ValidationError):
            half_sample_mode([1.0, np.nan])
