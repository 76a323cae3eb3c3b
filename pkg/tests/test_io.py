"""Tests for image, descriptor, disparity and flow files"""

import struct

import numpy as np
import pytest
from PIL import Image as PILImage

from dasc.descriptor.dump import MAGIC, DescriptorField, decode_descriptors, read_descriptors, write_descriptors
from dasc.errors import FormatError, ImageIOError
from dasc.imaging.io import (
    encode_netpbm,
    parse_netpbm,
    read_color_image,
    read_image,
    read_pgm16,
    read_raster,
    write_image,
    write_pgm16,
)
from dasc.matching.io import (
    read_disparity_pfm,
    read_disparity_pgm,
    read_flo,
    read_pfm,
    write_disparity_pfm,
    write_disparity_pgm,
    write_flo,
    write_pfm,
)
from dasc.matching.wta import DisparityMap, FlowField


def test_parse_netpbm_with_comments_and_16_bit():
    data = b"P5\n# a comment\n3 2\n255\n" + bytes([0, 51, 255, 102, 153, 204])
    img = parse_netpbm(data)
    assert img.shape == (2, 3)
    assert img[0, 1] == pytest.approx(0.2)

    wide = b"P6\n1 1\n65535\n" + struct.pack(">HHH", 65535, 0, 32768)
    color = parse_netpbm(wide)
    assert color.shape == (1, 1, 3)
    np.testing.assert_allclose(color[0, 0], [1.0, 0.0, 32768 / 65535])

    with pytest.raises(FormatError):
        parse_netpbm(b"P5\n3 2\n255\n" + bytes(3))
    with pytest.raises(FormatError):
        parse_netpbm(b"P2\n1 1\n255\n0")


def test_encode_netpbm_quantizes():
    img = np.array([[0.0, 0.5, 1.0]])
    np.testing.assert_allclose(parse_netpbm(encode_netpbm(img)), np.rint(img * 255) / 255)


def test_png_through_pillow(tmp_path):
    rgb = np.zeros((4, 5, 3), dtype=np.uint8)
    rgb[..., 1] = 255
    PILImage.fromarray(rgb).save(tmp_path / "green.png")
    assert read_raster(tmp_path / "green.png").shape == (4, 5, 3)
    np.testing.assert_allclose(read_image(tmp_path / "green.png"), 0.587)

    gray = np.random.default_rng(0).random((6, 7))
    write_image(tmp_path / "gray.png", gray)
    np.testing.assert_allclose(read_image(tmp_path / "gray.png"), gray, atol=0.5 / 255 + 1e-12)
    assert read_color_image(tmp_path / "gray.png").shape == (6, 7, 3)


def test_image_errors(tmp_path):
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "missing.png")
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(FormatError):
        read_image(tmp_path / "junk.png")


def test_pgm16_labels(tmp_path):
    labels = np.array([[0, 1, 300], [65535, 2, 0]])
    write_pgm16(tmp_path / "labels.pgm", labels)
    np.testing.assert_array_equal(read_pgm16(tmp_path / "labels.pgm"), labels)
    with pytest.raises(FormatError):
        write_pgm16(tmp_path / "bad.pgm", np.array([[70000]]))


def test_descriptor_container(tmp_path):
    values = np.random.default_rng(1).random((3, 4, 5))
    write_descriptors(tmp_path / "d.dasc", DescriptorField(values))
    data = (tmp_path / "d.dasc").read_bytes()
    assert data[:4] == MAGIC
    assert struct.unpack_from("<III", data, 4) == (4, 3, 5)
    assert len(data) == 16 + 4 * 3 * 4 * 5
    np.testing.assert_allclose(read_descriptors(tmp_path / "d.dasc").values, values, rtol=1e-6)

    with pytest.raises(FormatError):
        decode_descriptors(b"DASX" + data[4:])
    with pytest.raises(FormatError):
        decode_descriptors(data[:-4])


def test_pfm_orientation_and_invalid_pixels(tmp_path):
    values = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    write_pfm(tmp_path / "v.pfm", values)
    data = (tmp_path / "v.pfm").read_bytes()
    assert data.startswith(b"Pf\n2 3\n-1.0\n")
    # first stored row is the bottom image row
    assert struct.unpack_from("<ff", data, len(b"Pf\n2 3\n-1.0\n")) == (5.0, 6.0)
    np.testing.assert_array_equal(read_pfm(tmp_path / "v.pfm"), values)

    valid = np.array([[True, False], [True, True], [True, True]])
    write_disparity_pfm(tmp_path / "d.pfm", DisparityMap(values, valid))
    loaded = read_disparity_pfm(tmp_path / "d.pfm")
    np.testing.assert_array_equal(loaded.valid, valid)


def test_disparity_pgm_scale(tmp_path):
    disparity = DisparityMap(np.array([[1.5, 0.0], [7.25, 3.0]]), np.array([[True, False], [True, True]]))
    write_disparity_pgm(tmp_path / "d.pgm", disparity)
    loaded = read_disparity_pgm(tmp_path / "d.pgm")
    np.testing.assert_array_equal(loaded.valid, disparity.valid)
    np.testing.assert_allclose(loaded.values[loaded.valid], disparity.values[disparity.valid])
    assert read_pgm16(tmp_path / "d.pgm")[0].tolist() == [385, 0]


def test_disparity_pgm_keeps_zero_disparities_valid(tmp_path):
    write_disparity_pgm(tmp_path / "zero.pgm", DisparityMap(np.zeros((4, 4))))
    loaded = read_disparity_pgm(tmp_path / "zero.pgm")
    assert loaded.valid.all()
    np.testing.assert_array_equal(loaded.values, 0.0)

    with pytest.raises(FormatError):
        write_disparity_pgm(tmp_path / "big.pgm", DisparityMap(np.full((2, 2), 300.0)))


def test_flo_file(tmp_path):
    vectors = np.zeros((2, 3, 2))
    vectors[..., 0] = 1.5
    vectors[..., 1] = -2.0
    valid = np.ones((2, 3), dtype=bool)
    valid[0, 0] = False
    write_flo(tmp_path / "f.flo", FlowField(vectors, valid))
    data = (tmp_path / "f.flo").read_bytes()
    assert struct.unpack_from("<fii", data) == (202021.25, 3, 2)
    loaded = read_flo(tmp_path / "f.flo")
    np.testing.assert_array_equal(loaded.valid, valid)
    np.testing.assert_allclose(loaded.vectors[valid], vectors[valid])

    (tmp_path / "bad.flo").write_bytes(struct.pack("<fii", 1.0, 1, 1) + bytes(8))
    with pytest.raises(FormatError):
        read_flo(tmp_path / "bad.flo")
