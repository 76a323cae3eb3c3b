"""Tests for the descriptor pipeline and its direct nested-loop counterpart"""

import math
import time

import numpy as np
import pytest

from dasc.descriptor.dasc import (
    DascParams,
    Interpolation,
    compute_dasc,
    correlation_from_moments,
    dasc_responses,
    robust_similarity,
)
from dasc.descriptor.oracle import compute_dasc_oracle, dasc_responses_oracle
from dasc.descriptor.patterns import SamplingPatternSet, default_patterns
from dasc.errors import InternalError, ParameterError
from dasc.imaging.eaf import FilterKind
from dasc.matching.wta import match_stereo_wta, raw_intensity_stereo_wta
from dasc.synthetic import ShiftedStereoConfig, ShiftedStereoDataset


def test_params_validation():
    with pytest.raises(AssertionError):
        DascParams(patch_size=4).validate()
    with pytest.raises(AssertionError):
        DascParams(patch_size=5, support_size=5).validate()
    with pytest.raises(AssertionError):
        DascParams(support_size=30).validate()
    with pytest.raises(AssertionError):
        DascParams(tau_c=0.0).validate()
    with pytest.raises(AssertionError):
        DascParams(sigma_c=-1.0).validate()


def test_robust_similarity():
    assert robust_similarity(1.0, 0.5, 0.03) == pytest.approx(1.0)
    assert robust_similarity(-1.0, 0.5, 0.03) == pytest.approx(1.0)
    assert robust_similarity(0.0, 0.5, 0.03) == pytest.approx(math.exp(-2.0))
    assert robust_similarity(0.0, 0.1, 0.03) == pytest.approx(0.03)
    values = robust_similarity(np.array([0.2, -0.2]), 0.5, 0.03)
    assert values[0] == pytest.approx(values[1])


def test_correlation_from_moments_degenerate_is_zero():
    zeros = np.zeros(3)
    psi = correlation_from_moments(np.full(3, 0.5), zeros, np.full(3, 0.2), np.full(3, 0.04), np.full(3, 0.1))
    np.testing.assert_array_equal(psi, 0.0)


def test_constant_image_gives_uniform_descriptor():
    params = DascParams(patch_size=3, support_size=11)
    patterns = default_patterns(3, 11, 10, 2, 8, seed=0)
    field = compute_dasc(np.full((16, 16), 0.4), patterns, params)
    np.testing.assert_allclose(field.values, 1.0 / math.sqrt(10))


def test_responses_range_and_unit_norm():
    img = np.random.default_rng(0).random((20, 24))
    params = DascParams(patch_size=5, support_size=15)
    patterns = default_patterns(5, 15, 16, 2, 8, seed=1)
    responses = dasc_responses(img, patterns, params)
    assert responses.shape == (20, 24, 16)
    assert responses.min() >= params.tau_c - 1e-12
    assert responses.max() <= 1.0 + 1e-12
    field = compute_dasc(img, patterns, params)
    np.testing.assert_allclose(np.linalg.norm(field.values, axis=2), 1.0)


def test_efficient_path_matches_direct_sums():
    params = DascParams(patch_size=5, support_size=15)
    patterns = default_patterns(5, 15, 16, 2, 8, seed=2)
    for seed in range(10):
        img = np.random.default_rng(100 + seed).random((32, 32))
        fast = compute_dasc(img, patterns, params)
        direct = compute_dasc_oracle(img, patterns, params)
        assert np.max(np.abs(fast.values - direct.values)) <= 1e-4


@pytest.mark.parametrize("kind", [FilterKind.BOX, FilterKind.GAUSSIAN])
def test_efficient_path_matches_direct_sums_other_weights(kind):
    params = DascParams(patch_size=3, support_size=11, weighting=kind)
    patterns = default_patterns(3, 11, 12, 2, 8, seed=3)
    img = np.random.default_rng(5).random((18, 18))
    fast = dasc_responses(img, patterns, params)
    direct = dasc_responses_oracle(img, patterns, params)
    np.testing.assert_allclose(fast, direct, atol=1e-9)


def test_symmetric_box_weights_agree_in_the_interior():
    params = DascParams(patch_size=3, support_size=11, weighting=FilterKind.BOX)
    patterns = default_patterns(3, 11, 12, 2, 8, seed=4)
    img = np.random.default_rng(6).random((24, 24))
    asym = dasc_responses_oracle(img, patterns, params)
    sym = dasc_responses_oracle(img, patterns, params, symmetric=True)
    margin = params.max_offset + params.patch_size // 2
    np.testing.assert_allclose(sym[margin:-margin, margin:-margin], asym[margin:-margin, margin:-margin], atol=1e-10)


def test_symmetric_guided_weights_in_range():
    params = DascParams(patch_size=3, support_size=11)
    patterns = default_patterns(3, 11, 8, 2, 8, seed=5)
    img = np.random.default_rng(7).random((14, 14))
    sym = dasc_responses_oracle(img, patterns, params, symmetric=True)
    assert np.all(np.isfinite(sym))
    assert sym.min() >= params.tau_c - 1e-12 and sym.max() <= 1.0 + 1e-12


def test_box_weights_affine_invariance():
    params = DascParams(patch_size=5, support_size=15, weighting=FilterKind.BOX)
    patterns = default_patterns(5, 15, 16, 2, 8, seed=6)
    img = np.random.default_rng(8).random((24, 24))
    a = compute_dasc(img, patterns, params)
    b = compute_dasc(0.5 * img + 0.2, patterns, params)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_workers_and_interpolation_do_not_change_integral_results():
    params = DascParams(patch_size=5, support_size=15)
    patterns = default_patterns(5, 15, 16, 2, 8, seed=7)
    img = np.random.default_rng(9).random((20, 20))
    base = compute_dasc(img, patterns, params)
    threaded = compute_dasc(img, patterns, params, workers=4)
    nearest = compute_dasc(img, patterns, params, interpolation=Interpolation.NEAREST)
    np.testing.assert_array_equal(base.values, threaded.values)
    np.testing.assert_allclose(base.values, nearest.values)


def test_real_valued_offsets():
    params = DascParams(patch_size=3, support_size=11)
    patterns = SamplingPatternSet(np.array([[0.0, 0.0], [0.5, -1.5]]), np.array([[2.5, 1.0], [-2.0, 0.0]]))
    img = np.random.default_rng(10).random((16, 16))
    field = compute_dasc(img, patterns, params)
    assert field.values.shape == (16, 16, 2)
    assert np.all(np.isfinite(field.values))
    with pytest.raises(ParameterError):
        dasc_responses_oracle(img, patterns, params)


def test_pattern_outside_support_is_rejected():
    params = DascParams(patch_size=5, support_size=11)
    patterns = SamplingPatternSet(np.array([[0, 0]]), np.array([[4, 0]]))
    with pytest.raises(ParameterError):
        compute_dasc(np.zeros((16, 16)), patterns, params)


def test_internal_error_carries_location():
    err = InternalError("zero descriptor norm", location=(3, 4))
    assert err.location == (3, 4)
    assert "x=3" in str(err) and "y=4" in str(err)
    assert err.exit_code == 5


def _interior_accuracy(estimate, disparity, margin):
    values = estimate.values[margin:-margin, margin + disparity : -margin]
    return float(np.mean(np.abs(values - disparity) <= 1.0))


def test_guided_descriptor_stereo_under_affine_change():
    item = ShiftedStereoDataset(ShiftedStereoConfig(height=64, width=96, photometric="affine", seed=11, size=1))[0]
    params = DascParams()
    patterns = default_patterns(seed=0)
    left = compute_dasc(item["image_a"], patterns, params)
    right = compute_dasc(item["image_b"], patterns, params)
    disparity = match_stereo_wta(left, right, max_disp=16)
    assert _interior_accuracy(disparity, 7, 15) >= 0.9


def test_descriptor_stereo_under_intensity_inversion():
    item = ShiftedStereoDataset(ShiftedStereoConfig(height=64, width=96, photometric="invert", seed=12, size=1))[0]
    params = DascParams()
    patterns = default_patterns(seed=0)
    left = compute_dasc(item["image_a"], patterns, params)
    right = compute_dasc(item["image_b"], patterns, params)
    assert _interior_accuracy(match_stereo_wta(left, right, 16), 7, 15) >= 0.85

    raw = raw_intensity_stereo_wta(item["image_a"], item["image_b"], 16)
    assert _interior_accuracy(raw, 7, 15) <= 0.5


def test_runtime_independent_of_patch_size():
    img = np.random.default_rng(13).random((256, 256))
    patterns = default_patterns(9, 31, 32, 4, 36, seed=0)

    def best_time(patch_size):
        params = DascParams(patch_size=patch_size, support_size=31)
        times = []
        for _ in range(3):
            start = time.perf_counter()
            compute_dasc(img, patterns, params)
            times.append(time.perf_counter() - start)
        return min(times)

    small, large = best_time(5), best_time(9)
    assert large / small <= 1.3
