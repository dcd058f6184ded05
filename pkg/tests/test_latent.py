import numpy as np
import pytest

from latentcloud.errors import ConfigError, DimensionError
from latentcloud.latent import (
    LatentStats,
    feature_edit,
    interpolate,
    latent_stats,
    slider_to_t,
)


class TestFeatureEdit:
    def test_zero_transformation_is_identity(self, rng):
        f = rng.normal(size=6)
        np.testing.assert_array_equal(feature_edit(f, np.zeros(6)), f)

    def test_componentwise_addition(self):
        x = feature_edit(np.array([1.0, 2.0]), np.array([0.5, -1.0]))
        np.testing.assert_array_equal(x, [1.5, 1.0])

    def test_negation_inverts(self, rng):
        f = rng.normal(size=8)
        t = rng.normal(size=8)
        back = feature_edit(feature_edit(f, t), -t)
        np.testing.assert_allclose(back, f, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            feature_edit(np.zeros(3), np.zeros(4))


class TestInterpolate:
    def test_one_hot_is_exact_endpoint(self, rng):
        v = rng.normal(size=(4, 6))
        for i in range(4):
            w = np.zeros(4)
            w[i] = 1.0
            assert interpolate(v, w).tobytes() == v[i].tobytes()

    def test_scaled_one_hot_is_exact_endpoint(self, rng):
        v = rng.normal(size=(3, 5))
        assert interpolate(v, [0.0, 7.5, 0.0]).tobytes() == v[1].tobytes()

    def test_equal_weights_two_rows_is_midpoint(self, rng):
        v = rng.normal(size=(2, 9))
        h = interpolate(v, [1.0, 1.0])
        np.testing.assert_allclose(h, (v[0] + v[1]) / 2.0, atol=1e-12)

    def test_scale_invariance(self, rng):
        v = rng.normal(size=(3, 7))
        a = interpolate(v, [2.0, 2.0, 2.0])
        b = interpolate(v, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_output_in_row_hull(self, rng):
        v = rng.normal(size=(5, 4))
        for _ in range(20):
            w = rng.uniform(0.0, 1.0, size=5)
            w[0] += 1e-9  # keep the sum positive
            h = interpolate(v, w)
            assert np.all(h >= v.min(axis=0) - 1e-12)
            assert np.all(h <= v.max(axis=0) + 1e-12)

    def test_all_zero_weights_rejected(self, rng):
        with pytest.raises(ConfigError):
            interpolate(rng.normal(size=(3, 4)), np.zeros(3))

    def test_negative_weights_rejected(self, rng):
        with pytest.raises(ConfigError):
            interpolate(rng.normal(size=(3, 4)), [0.5, -0.1, 0.6])

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            interpolate(rng.normal(size=(3, 4)), [1.0, 1.0])
        with pytest.raises(DimensionError):
            interpolate(rng.normal(size=(1, 4)), [1.0])


class TestLatentStats:
    def test_single_latent(self):
        stats = latent_stats([np.array([1.0, -2.0, 3.0])])
        np.testing.assert_array_equal(stats.min, [1.0, -2.0, 3.0])
        np.testing.assert_array_equal(stats.max, [1.0, -2.0, 3.0])
        assert stats.count == 1

    def test_two_latents(self):
        stats = latent_stats([np.array([0.0, 5.0]), np.array([2.0, 1.0])])
        np.testing.assert_array_equal(stats.min, [0.0, 1.0])
        np.testing.assert_array_equal(stats.max, [2.0, 5.0])

    def test_bounds_every_latent(self, rng):
        latents = [rng.normal(size=10) for _ in range(50)]
        stats = latent_stats(latents)
        # brute-force re-scan
        for z in latents:
            assert np.all(stats.min <= z) and np.all(z <= stats.max)
        for j in range(10):
            assert stats.min[j] == min(z[j] for z in latents)
            assert stats.max[j] == max(z[j] for z in latents)

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            latent_stats([])

    def test_invalid_bounds_rejected(self):
        with pytest.raises(DimensionError):
            LatentStats(min=np.array([1.0]), max=np.array([0.0]), count=1)


class TestSliderToT:
    @pytest.fixture
    def stats(self, rng):
        latents = [rng.normal(size=16) * 2 for _ in range(30)]
        return latent_stats(latents)

    def test_centered_controls_give_zero_vector(self, stats):
        t = slider_to_t(stats, np.zeros(8), np.zeros(8), 0)
        np.testing.assert_array_equal(t, np.zeros(16))

    def test_full_deflection_is_half_interval(self):
        stats = LatentStats(
            min=np.full(8, -2.0), max=np.full(8, 2.0), count=3
        )
        sliders = np.zeros(8)
        sliders[0] = 1.0
        t = slider_to_t(stats, sliders, np.zeros(8), 0)
        assert t[0] == 2.0
        np.testing.assert_array_equal(t[1:], np.zeros(7))

    def test_formula(self, stats, rng):
        sliders = rng.uniform(-1, 1, size=8)
        knobs = rng.uniform(-0.1, 0.1, size=8)
        t = slider_to_t(stats, sliders, knobs, 4)
        for j in range(8):
            half = (stats.max[4 + j] - stats.min[4 + j]) / 2.0
            assert t[4 + j] == (sliders[j] + knobs[j]) * half
        np.testing.assert_array_equal(t[:4], np.zeros(4))
        np.testing.assert_array_equal(t[12:], np.zeros(4))

    def test_offset_moves_block(self, stats):
        sliders = np.full(8, 0.5)
        t = slider_to_t(stats, sliders, np.zeros(8), 8)
        np.testing.assert_array_equal(t[:8], np.zeros(8))
        assert np.all(t[8:] != 0.0)

    def test_offset_out_of_range(self, stats):
        with pytest.raises(DimensionError):
            slider_to_t(stats, np.zeros(8), np.zeros(8), 9)
        with pytest.raises(DimensionError):
            slider_to_t(stats, np.zeros(8), np.zeros(8), -1)

    def test_out_of_range_controls_rejected(self, stats):
        bad = np.zeros(8)
        bad[3] = 1.5
        with pytest.raises(ConfigError):
            slider_to_t(stats, bad, np.zeros(8), 0)
        bad_knobs = np.zeros(8)
        bad_knobs[0] = 0.2
        with pytest.raises(ConfigError):
            slider_to_t(stats, np.zeros(8), bad_knobs, 0)
