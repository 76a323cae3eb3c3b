"""Disparity and flow files: PFM, 16-bit PGM disparity and Middlebury .flo"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import FormatError, ImageIOError
from ..imaging.io import encode_pgm16, read_pgm16
from .wta import DisparityMap, FlowField

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLO_MAGIC = 202021.25


def _read(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e


def _write(path: PathLike, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def write_pfm(path: PathLike, values: np.ndarray) -> None:
    """Single-channel little-endian PFM, rows stored bottom to top; non-finite values are kept as inf"""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise FormatError(f"PFM needs a 2-D array, got shape {values.shape}")
    height, width = values.shape
    header = b"Pf\n%d %d\n-1.0\n" % (width, height)
    _write(path, header + np.flipud(values).astype("<f4").tobytes())


def read_pfm(path: PathLike) -> np.ndarray:
    data = _read(path)
    lines = data.split(b"\n", 3)
    if len(lines) < 4 or lines[0].strip() != b"Pf":
        raise FormatError(f"{path}: not a single-channel PFM")
    try:
        width, height = (int(v) for v in lines[1].split())
        scale = float(lines[2])
    except ValueError as e:
        raise FormatError(f"{path}: malformed PFM header") from e
    dtype = "<f4" if scale < 0 else ">f4"
    raster = lines[3]
    if len(raster) < 4 * width * height:
        raise FormatError(f"{path}: PFM raster truncated")
    values = np.frombuffer(raster, dtype=dtype, count=width * height).reshape(height, width)
    return np.flipud(values).astype(np.float64)


def write_disparity_pfm(path: PathLike, disparity: DisparityMap) -> None:
    write_pfm(path, np.where(disparity.valid, disparity.values, np.inf))


def read_disparity_pfm(path: PathLike) -> DisparityMap:
    values = read_pfm(path)
    return DisparityMap(values, np.isfinite(values))


def write_disparity_pgm(path: PathLike, disparity: DisparityMap, scale: float = 256.0) -> None:
    """Stored value round(d * scale) + 1; 0 marks an invalid pixel, so d = 0 stays valid"""
    if scale <= 0:
        raise FormatError(f"disparity scale must be > 0, got {scale}")
    stored = np.where(disparity.valid, np.rint(disparity.values * scale) + 1, 0)
    _write(path, encode_pgm16(stored.astype(np.int64)))


def read_disparity_pgm(path: PathLike, scale: float = 256.0) -> DisparityMap:
    if scale <= 0:
        raise FormatError(f"disparity scale must be > 0, got {scale}")
    stored = read_pgm16(path)
    valid = stored > 0
    return DisparityMap(np.where(valid, stored - 1, 0) / scale, valid)


def write_flo(path: PathLike, flow: FlowField) -> None:
    """Middlebury .flo: float32 magic, int32 width and height, interleaved (u, v) float32"""
    height, width, _ = flow.vectors.shape
    vectors = np.where(flow.valid[:, :, None], flow.vectors, 1e10)
    header = struct.pack("<fii", FLO_MAGIC, width, height)
    _write(path, header + vectors.astype("<f4").tobytes())


def read_flo(path: PathLike) -> FlowField:
    data = _read(path)
    if len(data) < 12:
        raise FormatError(f"{path}: shorter than a .flo header")
    magic, width, height = struct.unpack_from("<fii", data)
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: bad .flo magic {magic}")
    if width < 1 or height < 1 or len(data) != 12 + 8 * width * height:
        raise FormatError(f"{path}: .flo size does not match {width}x{height}")
    vectors = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width, 2).astype(np.float64)
    valid = np.all(np.abs(vectors) < 1e9, axis=2)
    return FlowField(vectors, valid)
