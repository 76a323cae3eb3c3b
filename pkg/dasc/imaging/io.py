"""Raster image reading and writing.

Binary netpbm (P5 grayscale, P6 colour, 8 or 16 bit) is parsed directly; everything
else goes through Pillow. Pixel values are scaled to [0, 1].
"""

import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import numpy.typing as npt
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from ..errors import FormatError, ImageIOError
from .core import Image, to_grayscale

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NETPBM_MAGIC = {b"P5": 1, b"P6": 3}


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e


def _write_bytes(path: PathLike, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def _netpbm_header(data: bytes) -> Tuple[List[int], int]:
    """Return the three header integers (width, height, maxval) and the raster offset"""
    fields: List[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("truncated or malformed netpbm header")
        fields.append(int(data[start:pos]))
    # exactly one whitespace byte separates the header from the raster
    return fields, pos + 1


def parse_netpbm(data: bytes) -> npt.NDArray[np.float64]:
    """Decode binary PGM/PPM bytes into an (H, W) or (H, W, 3) array in [0, 1]"""
    magic = data[:2]
    if magic not in NETPBM_MAGIC:
        raise FormatError(f"unsupported netpbm magic {magic!r}")
    channels = NETPBM_MAGIC[magic]
    (width, height, maxval), offset = _netpbm_header(data)
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"invalid netpbm header: {width}x{height}, maxval {maxval}")

    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    count = width * height * channels
    if len(data) - offset < count * dtype.itemsize:
        raise FormatError(f"netpbm raster truncated: expected {count} samples")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset).astype(np.float64) / maxval
    shape = (height, width) if channels == 1 else (height, width, 3)
    return raster.reshape(shape)


def encode_netpbm(img: npt.ArrayLike, maxval: int = 255) -> bytes:
    """Encode an (H, W) or (H, W, 3) array in [0, 1] as binary PGM/PPM"""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise FormatError(f"cannot encode array of shape {arr.shape} as netpbm")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    samples = np.rint(np.clip(arr, 0.0, 1.0) * maxval).astype(dtype)
    header = b"%s\n%d %d\n%d\n" % (magic, arr.shape[1], arr.shape[0], maxval)
    return header + samples.tobytes()


def encode_pgm16(values: npt.ArrayLike) -> bytes:
    """Encode raw non-negative integers (e.g. labels) as a 16-bit PGM"""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise FormatError(f"16-bit PGM needs a 2-D array, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 65535):
        raise FormatError("values do not fit in 16 bits")
    header = b"P5\n%d %d\n65535\n" % (arr.shape[1], arr.shape[0])
    return header + arr.astype(">u2").tobytes()


def write_pgm16(path: PathLike, values: npt.ArrayLike) -> None:
    _write_bytes(path, encode_pgm16(values))


def read_pgm16(path: PathLike) -> npt.NDArray[np.int64]:
    """Read raw 16-bit PGM samples without scaling"""
    data = _read_bytes(path)
    if data[:2] != b"P5":
        raise FormatError(f"{path} is not a binary PGM")
    (width, height, maxval), offset = _netpbm_header(data)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    if len(data) - offset < width * height * dtype.itemsize:
        raise FormatError(f"{path}: raster truncated")
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    return raster.astype(np.int64).reshape(height, width)


def read_raster(path: PathLike) -> npt.NDArray[np.float64]:
    """Read an image file as (H, W) grayscale or (H, W, 3) colour in [0, 1]"""
    data = _read_bytes(path)
    if data[:2] in NETPBM_MAGIC:
        return parse_netpbm(data)

    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                scale = 65535.0 if arr.max(initial=0) > 255 or im.mode.startswith("I;16") else 255.0
                return np.clip(arr / scale, 0.0, 1.0)
            if im.mode in ("L", "1"):
                return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: unrecognised image format") from e
    except OSError as e:
        raise ImageIOError(f"cannot decode {path}: {e}") from e


def read_image(path: PathLike) -> Image:
    """Read an image as single-channel luminance"""
    raster = read_raster(path)
    img = to_grayscale(raster) if raster.ndim == 3 else raster
    logger.debug("read %s (%dx%d)", path, img.shape[1], img.shape[0])
    return img


def read_color_image(path: PathLike) -> npt.NDArray[np.float64]:
    """Read an image as (H, W, 3) RGB; grayscale files are replicated into three channels"""
    raster = read_raster(path)
    if raster.ndim == 2:
        raster = np.repeat(raster[:, :, None], 3, axis=2)
    return raster


def write_image(path: PathLike, img: npt.ArrayLike) -> None:
    """Write a [0, 1] image; .pgm/.ppm are written as 8-bit netpbm, anything else via Pillow"""
    path = Path(path)
    arr = np.asarray(img, dtype=np.float64)
    if path.suffix.lower() in (".pgm", ".ppm"):
        _write_bytes(path, encode_netpbm(arr))
        return
    samples = np.rint(np.clip(arr, 0.0, 1.0) * 255).astype(np.uint8)
    try:
        PILImage.fromarray(samples).save(path)
    except (OSError, ValueError) as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e
