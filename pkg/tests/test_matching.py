"""Tests for winner-takes-all matching and the correspondence metrics"""

import numpy as np
import pytest

from dasc.descriptor.dump import DescriptorField
from dasc.errors import DimensionError, ParameterError, UndefinedMetricError
from dasc.matching.metrics import (
    bad_pixel_rate,
    descriptor_distance,
    endpoint_error,
    flow_bad_pixel_rate,
    label_transfer_error,
    transfer_labels,
)
from dasc.matching.wta import DisparityMap, FlowField, match_flow_wta, match_stereo_wta, raw_intensity_stereo_wta


def random_field(h, w, d, seed):
    return np.random.default_rng(seed).random((h, w, d))


def stereo_oracle(left, right, max_disp):
    h, w, _ = left.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            best = np.inf
            for d in range(max_disp + 1):
                if x - d < 0:
                    break
                cost = np.sum((left[y, x] - right[y, x - d]) ** 2)
                if cost < best:
                    best, out[y, x] = cost, d
    return out


def test_stereo_self_match_is_zero():
    field = random_field(6, 9, 4, 0)
    disparity = match_stereo_wta(field, field, 5)
    np.testing.assert_array_equal(disparity.values, 0.0)
    assert disparity.valid.all()


def test_stereo_ties_go_to_the_smaller_disparity():
    disparity = match_stereo_wta(np.ones((3, 8, 2)), np.ones((3, 8, 2)), 4)
    np.testing.assert_array_equal(disparity.values, 0.0)


def test_stereo_recovers_a_constructed_shift():
    left = random_field(8, 30, 6, 1)
    right = random_field(8, 30, 6, 2)
    right[:, : 30 - 7] = left[:, 7:]
    disparity = match_stereo_wta(DescriptorField(left), DescriptorField(right), 10)
    np.testing.assert_array_equal(disparity.values[:, 7:], 7.0)


def test_stereo_matches_exhaustive_search():
    left, right = random_field(5, 12, 3, 3), random_field(5, 12, 3, 4)
    np.testing.assert_array_equal(match_stereo_wta(left, right, 6).values, stereo_oracle(left, right, 6))


def test_stereo_invariant_to_monotone_distance_changes():
    left, right = random_field(5, 12, 3, 5), random_field(5, 12, 3, 6)
    scaled = match_stereo_wta(3 * left, 3 * right, 6)
    np.testing.assert_array_equal(match_stereo_wta(left, right, 6).values, scaled.values)


def test_mirrored_pair_gives_the_mirrored_disparity_map():
    left = random_field(6, 20, 4, 7)
    right = random_field(6, 20, 4, 8)
    right[:, :15] = left[:, 5:]
    right[:3, :13] = left[:3, 7:]
    disparity = match_stereo_wta(left, right, 9)
    mirrored = match_stereo_wta(left[:, ::-1], right[:, ::-1], 9, direction=1)
    np.testing.assert_array_equal(mirrored.values, disparity.values[:, ::-1])
    np.testing.assert_array_equal(mirrored.valid, disparity.valid[:, ::-1])

    ties = match_stereo_wta(np.ones((2, 6, 1)), np.ones((2, 6, 1)), 3, direction=1)
    np.testing.assert_array_equal(ties.values, 0.0)


def test_stereo_errors():
    with pytest.raises(DimensionError):
        match_stereo_wta(random_field(4, 4, 2, 0), random_field(4, 5, 2, 0), 2)
    with pytest.raises(ParameterError):
        match_stereo_wta(random_field(4, 4, 2, 0), random_field(4, 4, 2, 0), -1)
    with pytest.raises(ParameterError):
        match_stereo_wta(random_field(4, 4, 2, 0), random_field(4, 4, 2, 0), 2, direction=0)


def test_flow_self_match_is_zero():
    field = random_field(7, 7, 3, 7)
    flow = match_flow_wta(field, field, 3)
    np.testing.assert_array_equal(flow.vectors, 0.0)


def test_flow_recovers_a_constructed_translation():
    a = random_field(16, 18, 5, 8)
    # a(x, y) = b(x + 3, y - 2)
    b = np.roll(a, shift=(-2, 3), axis=(0, 1))
    flow = match_flow_wta(a, b, 4)
    np.testing.assert_array_equal(flow.u[2:, : 18 - 3], 3.0)
    np.testing.assert_array_equal(flow.v[2:, : 18 - 3], -2.0)
    assert np.all(np.hypot(flow.u, flow.v) <= 4 * np.sqrt(2))


def test_flow_ties_go_to_the_smaller_v_then_u():
    flow = match_flow_wta(np.ones((5, 5, 1)), np.ones((5, 5, 1)), 1)
    # the centre pixel has every candidate in bounds
    assert tuple(flow.vectors[2, 2]) == (-1.0, -1.0)


def test_raw_intensity_baseline_recovers_a_shift():
    texture = np.random.default_rng(9).random((20, 40))
    left, right = texture[:, :32], texture[:, 5:37]
    disparity = raw_intensity_stereo_wta(left, right, 8)
    np.testing.assert_array_equal(disparity.values[3:-3, 8:-3], 5.0)


def test_bad_pixel_rate_examples():
    gt = DisparityMap(np.full((4, 4), 3.0))
    assert bad_pixel_rate(gt, gt) == 0.0
    assert bad_pixel_rate(DisparityMap(np.full((4, 4), 5.0)), gt) == 1.0
    half = np.full((4, 4), 3.0)
    half[:2] = 5.0
    assert bad_pixel_rate(half, gt) == 0.5

    values = np.full((4, 4), 3.0)
    values[0, 0] = np.nan
    assert bad_pixel_rate(DisparityMap(np.full((4, 4), 3.0)), DisparityMap(values)) == 0.0
    with pytest.raises(UndefinedMetricError):
        bad_pixel_rate(gt, gt, mask=np.zeros((4, 4), dtype=bool))


def test_label_transfer_error_examples():
    gt = np.array([[1, 1, 0], [2, 2, 0]])
    assert label_transfer_error(gt, gt) == 0.0
    assert label_transfer_error(np.array([[2, 2, 5], [1, 1, 5]]), gt) == 1.0
    assert label_transfer_error(np.array([[1, 2, 7], [2, 2, 7]]), gt) == 0.25
    with pytest.raises(UndefinedMetricError):
        label_transfer_error(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        label_transfer_error(np.zeros((2, 2)), np.zeros((2, 3)))


def test_endpoint_error_examples():
    zero = FlowField(np.zeros((3, 4, 2)))
    assert endpoint_error(zero, zero) == 0.0
    assert endpoint_error(FlowField.uniform(3, 4, 3.0, 4.0), zero) == pytest.approx(5.0)

    rng = np.random.default_rng(10)
    flow, gt = rng.normal(size=(6, 7, 2)), rng.normal(size=(6, 7, 2))
    expected = np.mean([np.hypot(*(flow[y, x] - gt[y, x])) for y in range(6) for x in range(7)])
    assert abs(endpoint_error(flow, gt) - expected) <= 1e-10

    with pytest.raises(UndefinedMetricError):
        endpoint_error(zero, zero, mask=np.zeros((3, 4), dtype=bool))


def test_flow_bad_pixel_rate():
    zero = FlowField(np.zeros((3, 4, 2)))
    offset = FlowField.uniform(3, 4, 3.0, 4.0)
    assert flow_bad_pixel_rate(offset, zero) == 1.0
    assert flow_bad_pixel_rate(offset, zero, threshold=6.0) == 0.0


def test_transfer_labels():
    annotation_b = np.array([[1, 2, 3], [4, 5, 6]])
    labels = transfer_labels(annotation_b, FlowField.uniform(2, 3, 1.0, 0.0))
    np.testing.assert_array_equal(labels, [[2, 3, 0], [5, 6, 0]])


def test_descriptor_distance():
    a = random_field(5, 6, 4, 11)
    zero = FlowField(np.zeros((5, 6, 2)))
    assert descriptor_distance(a, a, zero) == 0.0

    b = np.roll(a, shift=1, axis=1)
    assert descriptor_distance(a, b, FlowField.uniform(5, 6, 1.0, 0.0)) == 0.0
    assert descriptor_distance(a, b, zero) > 0.0
    with pytest.raises(UndefinedMetricError):
        descriptor_distance(a, a, FlowField.uniform(5, 6, 10.0, 0.0))
