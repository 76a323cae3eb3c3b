"""Tests for superpixel segmentation and the superpixel affinity"""

import math

import numpy as np
import pytest
from scipy import ndimage

from dasc.errors import DimensionError, ParameterError
from dasc.geometry.superpixels import (
    SuperpixelConfig,
    SuperpixelMap,
    appearance_features,
    canonical_labels,
    pairwise_affinity,
    segment_superpixels,
    superpixel_affinity,
)


def test_config_validation():
    with pytest.raises(AssertionError):
        SuperpixelConfig(target_count=0).validate()
    with pytest.raises(AssertionError):
        SuperpixelConfig(lambda_c=0.0).validate()


def test_canonical_labels_split_and_renumber():
    labels = np.array([[3, 1, 3], [3, 1, 3]])
    np.testing.assert_array_equal(canonical_labels(labels), [[0, 1, 2], [0, 1, 2]])

    # diagonal contact is not 4-connected
    labels = np.array([[7, 2], [2, 7]])
    np.testing.assert_array_equal(canonical_labels(labels), [[0, 1], [2, 3]])

    wrapped = canonical_labels(np.array([[5, 5, 5], [5, 0, 5], [0, 0, 5]]))
    np.testing.assert_array_equal(wrapped, [[0, 0, 0], [0, 1, 0], [1, 1, 0]])
    np.testing.assert_array_equal(canonical_labels(wrapped), wrapped)
    assert canonical_labels(np.array([[-4]])).tolist() == [[0]]


def test_superpixel_map_geometry():
    spmap = SuperpixelMap(np.array([[0, 0, 1], [0, 0, 1], [2, 2, 2]]))
    assert spmap.count == 3
    np.testing.assert_array_equal(spmap.sizes, [4, 2, 3])
    np.testing.assert_allclose(spmap.centroids(), [[0.5, 0.5], [2.0, 0.5], [1.0, 2.0]])
    np.testing.assert_array_equal(spmap.adjacent_pairs(), [[0, 1], [0, 2], [1, 2]])
    rows, cols = spmap.pixels(1)
    assert sorted(zip(rows.tolist(), cols.tolist())) == [(0, 2), (1, 2)]

    with pytest.raises(ParameterError):
        SuperpixelMap(np.array([[0, 2]]))
    with pytest.raises(DimensionError):
        SuperpixelMap(np.zeros(4, dtype=int))


def test_segmentation_is_connected_and_deterministic():
    img = np.zeros((40, 48))
    img[:, 24:] = 1.0
    img += 0.05 * np.random.default_rng(0).random(img.shape)
    spmap = segment_superpixels(img, target_count=12, seed=0)
    assert spmap.labels.shape == img.shape
    for m in range(spmap.count):
        _, pieces = ndimage.label(spmap.labels == m, structure=ndimage.generate_binary_structure(2, 1))
        assert pieces == 1

    again = segment_superpixels(img, target_count=12, seed=5)
    np.testing.assert_array_equal(spmap.labels, again.labels)


def test_segmentation_with_colour():
    rgb = np.random.default_rng(1).random((24, 24, 3))
    gray = rgb.mean(axis=2)
    spmap = segment_superpixels(gray, target_count=9, color=rgb)
    assert spmap.count >= 1
    with pytest.raises(DimensionError):
        segment_superpixels(gray, target_count=9, color=rgb[:20])


def test_segmentation_rejects_bad_counts():
    with pytest.raises(ParameterError):
        segment_superpixels(np.zeros((4, 4)), target_count=17)
    with pytest.raises(ParameterError):
        segment_superpixels(np.zeros((4, 4)), target_count=0)


def test_appearance_features():
    spmap = SuperpixelMap(np.array([[0, 0, 1, 1]]))
    img = np.array([[0.2, 0.4, 1.0, 1.0]])
    features = appearance_features(spmap, img)
    np.testing.assert_allclose(features, [[0.3, 0.1], [1.0, 0.0]], atol=1e-9)

    rgb = np.repeat(img[:, :, None], 3, axis=2)
    assert appearance_features(spmap, img, rgb).shape == (2, 18)


def test_pairwise_affinity():
    value = pairwise_affinity([0.5, 0.1], [0.3, 0.1], [0.0, 0.0], [1.0, 2.0], 0.1, 30.0)
    assert value == pytest.approx(math.exp(-0.04 / 0.1 - 5.0 / 30.0))


def test_superpixel_affinity_is_symmetric_on_adjacent_pairs():
    spmap = SuperpixelMap(np.array([[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]]))
    img = np.random.default_rng(2).random((4, 4))
    affinity = superpixel_affinity(spmap, img).toarray()
    np.testing.assert_allclose(affinity, affinity.T)
    np.testing.assert_array_equal(np.diag(affinity), 0.0)
    # 0 and 3 touch only diagonally
    assert affinity[0, 3] == 0.0 and affinity[1, 2] == 0.0
    assert np.all(affinity[[0, 0, 1, 2], [1, 2, 3, 3]] > 0)
    assert affinity.max() <= 1.0

    with pytest.raises(ParameterError):
        superpixel_affinity(spmap, img, lambda_c=0.0)
