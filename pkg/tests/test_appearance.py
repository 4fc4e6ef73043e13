import colorsys
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import jensenshannon

from fisheye_reid.appearance import (
    LN2,
    HueHistogram,
    cosine_similarity_matrix,
    extract_hue_histogram,
    hue_dissimilarity_matrix,
    js_divergence,
    normalize_embedding,
    rgb_to_hue_degrees,
)
from fisheye_reid.errors import FeatureError, IngestionError


def distributions(n_bins=None):
    """Strategy: a probability vector (possibly with zero bins)."""
    bins = st.just(n_bins) if n_bins else st.integers(min_value=2, max_value=16)

    @st.composite
    def build(draw):
        b = draw(bins)
        weights = np.array(draw(
            st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=b, max_size=b)
        ))
        if weights.sum() == 0:
            weights[draw(st.integers(0, b - 1))] = 1.0
        return weights / weights.sum()

    return build()


class TestCosine:
    def test_identical_vectors(self):
        mat = cosine_similarity_matrix([np.array([1.0, 2.0, 3.0])], [np.array([1.0, 2.0, 3.0])])
        assert mat.values[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors(self):
        mat = cosine_similarity_matrix([np.array([1.0, 0.0])], [np.array([0.0, 1.0])])
        assert mat.values[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_45_degrees(self):
        mat = cosine_similarity_matrix([np.array([1.0, 0.0])], [np.array([1.0, 1.0])])
        assert mat.values[0, 0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(FeatureError, match="dimension"):
            cosine_similarity_matrix([np.array([1.0, 0.0])], [np.array([1.0, 0.0, 0.0])])

    def test_zero_vector_rejected(self):
        with pytest.raises(IngestionError, match="zero"):
            normalize_embedding(np.zeros(4))

    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.floats(0.1, 100.0),
        st.floats(0.1, 100.0),
    )
    def test_positive_scale_invariance(self, v, w, a, b):
        v, w = np.array(v), np.array(w)
        if not v.any() or not w.any():
            return
        base = cosine_similarity_matrix([v], [w]).values[0, 0]
        scaled = cosine_similarity_matrix([a * v], [b * w]).values[0, 0]
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_swap_gives_transpose(self, rng):
        q = [rng.normal(size=6) for _ in range(4)]
        g = [rng.normal(size=6) for _ in range(3)]
        forward = cosine_similarity_matrix(q, g).values
        backward = cosine_similarity_matrix(g, q).values
        np.testing.assert_allclose(forward, backward.T, atol=1e-12)

    def test_values_bounded(self, rng):
        q = [rng.normal(size=8) for _ in range(5)]
        g = [rng.normal(size=8) for _ in range(5)]
        values = cosine_similarity_matrix(q, g).values
        assert values.min() >= -1.0 and values.max() <= 1.0


class TestHueHistogram:
    def test_pure_red_lands_in_bin_zero(self):
        crop = np.full((4, 4, 3), (255, 0, 0), dtype=np.uint8)
        hist = extract_hue_histogram(crop, bins=256)
        assert hist.bins[0] == 1.0

    def test_pure_green_lands_in_bin_85(self):
        # independent conversion: colorsys gives hue 120 deg for pure green
        hue_deg = colorsys.rgb_to_hsv(0.0, 1.0, 0.0)[0] * 360.0
        expected_bin = math.floor(hue_deg / 360.0 * 256)
        assert expected_bin == 85
        crop = np.full((4, 4, 3), (0, 255, 0), dtype=np.uint8)
        hist = extract_hue_histogram(crop, bins=256)
        assert hist.bins[expected_bin] == 1.0

    def test_half_red_half_green(self):
        crop = np.zeros((2, 2, 3), dtype=np.uint8)
        crop[0, :, 0] = 255
        crop[1, :, 1] = 255
        hist = extract_hue_histogram(crop, bins=256)
        assert hist.bins[0] == 0.5
        assert hist.bins[85] == 0.5

    def test_matches_colorsys_on_random_pixels(self, rng):
        pixels = rng.integers(0, 256, size=(40, 3))
        hues, chromatic = rgb_to_hue_degrees(pixels)
        for (r, g, b), hue, chrom in zip(pixels, hues, chromatic):
            ref_h, ref_s, _ = colorsys.rgb_to_hsv(r / 255.0, g / 255.0, b / 255.0)
            assert chrom == (ref_s > 0)
            if chrom:
                assert hue == pytest.approx((ref_h * 360.0) % 360.0, abs=1e-9)

    def test_gray_pixels_are_skipped(self):
        crop = np.stack(
            [np.full((2, 3), 128, dtype=np.uint8)] * 3, axis=-1
        )  # pure gray, S = 0
        hist = extract_hue_histogram(crop, bins=8)
        np.testing.assert_allclose(hist.bins, np.full(8, 1.0 / 8))

    def test_gray_mixed_with_color_ignores_gray(self):
        crop = np.array([[[128, 128, 128], [255, 0, 0]]], dtype=np.uint8)
        hist = extract_hue_histogram(crop, bins=256)
        assert hist.bins[0] == 1.0
        assert hist.pixel_count == 1

    def test_brightness_rescaling_keeps_histogram(self, rng):
        crop = rng.uniform(0.2, 1.0, size=(5, 5, 3))
        base = extract_hue_histogram(crop, bins=64)
        for scale in (0.25, 0.5, 0.9):
            scaled = extract_hue_histogram(crop * scale, bins=64)
            np.testing.assert_allclose(scaled.bins, base.bins, atol=1e-12)

    def test_empty_crop_rejected(self):
        with pytest.raises(FeatureError, match="empty"):
            extract_hue_histogram(np.zeros((0, 3)))

    def test_too_few_bins_rejected(self):
        with pytest.raises(FeatureError):
            extract_hue_histogram(np.ones((2, 2, 3)), bins=1)

    def test_histogram_type_validates(self):
        with pytest.raises(FeatureError):
            HueHistogram(np.array([0.5, 0.6]), pixel_count=1)  # sums to 1.1


class TestJSDivergence:
    def test_identical_is_zero(self):
        assert js_divergence(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0

    def test_disjoint_attains_ln2(self):
        value = js_divergence(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert value == pytest.approx(LN2, abs=1e-12)

    def test_hand_computed_value(self):
        # 0.5*KL(q||m) + 0.5*KL(g||m) with m=(0.75, 0.25), natural log
        value = js_divergence(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        assert value == pytest.approx(0.2157616, abs=1e-6)

    def test_agrees_with_scipy(self, rng):
        for _ in range(50):
            q = rng.dirichlet(np.ones(32) * 0.3)
            g = rng.dirichlet(np.ones(32) * 0.3)
            expected = jensenshannon(q, g) ** 2  # scipy returns the sqrt, base e
            assert js_divergence(q, g) == pytest.approx(expected, abs=1e-10)

    def test_bin_mismatch(self):
        with pytest.raises(FeatureError, match="mismatch"):
            js_divergence(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    @settings(max_examples=200)
    @given(distributions(8), distributions(8))
    def test_symmetric_finite_bounded(self, q, g):
        forward = js_divergence(q, g)
        backward = js_divergence(g, q)
        assert forward == pytest.approx(backward, abs=1e-12)
        assert 0.0 <= forward <= LN2
        assert math.isfinite(forward)

    @settings(max_examples=100)
    @given(distributions(6))
    def test_zero_iff_equal(self, q):
        assert js_divergence(q, q) == 0.0
        g = np.roll(q, 1)
        if np.abs(q - g).max() > 1e-6:
            assert js_divergence(q, g) > 0.0

    def test_accepts_hue_histogram_objects(self):
        h1 = HueHistogram(np.array([0.5, 0.5]), pixel_count=10)
        h2 = HueHistogram(np.array([1.0, 0.0]), pixel_count=10)
        assert js_divergence(h1, h2) == pytest.approx(0.2157616, abs=1e-6)


class TestHueMatrix:
    def test_identical_single_pair(self):
        hist = np.array([0.25, 0.75])
        mat = hue_dissimilarity_matrix([hist], [hist])
        assert mat.values.shape == (1, 1)
        assert mat.values[0, 0] == 0.0

    def test_disjoint_pair_matrix(self):
        a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        mat = hue_dissimilarity_matrix([a, b], [a, b]).values
        np.testing.assert_allclose(np.diag(mat), 0.0)
        assert mat[0, 1] == pytest.approx(LN2, abs=1e-12)
        assert mat[1, 0] == pytest.approx(LN2, abs=1e-12)

    def test_entries_bounded_and_transpose_symmetric(self, rng):
        q = [rng.dirichlet(np.ones(16)) for _ in range(4)]
        g = [rng.dirichlet(np.ones(16)) for _ in range(3)]
        forward = hue_dissimilarity_matrix(q, g).values
        backward = hue_dissimilarity_matrix(g, q).values
        assert forward.min() >= 0.0 and forward.max() <= LN2
        np.testing.assert_allclose(forward, backward.T, atol=1e-12)
