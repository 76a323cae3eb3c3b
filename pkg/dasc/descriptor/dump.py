"""Descriptor fields and the binary descriptor container.

Container layout: magic b"DASC", little-endian u32 width, height, dim, then
float32 little-endian values, pixel-major (row by row) then slot order.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import numpy.typing as npt

from ..errors import DimensionError, FormatError, ImageIOError

logger = logging.getLogger(__name__)

MAGIC = b"DASC"
HEADER = struct.Struct("<4sIII")


@dataclass(eq=False)
class DescriptorField:
    """H x W x L volume of per-pixel descriptor vectors"""

    values: npt.NDArray[np.float64]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise DimensionError(f"descriptor field must be H x W x L, got shape {self.values.shape}")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def at(self, x: int, y: int) -> npt.NDArray[np.float64]:
        return self.values[y, x]


def as_descriptor_values(field: Union[DescriptorField, npt.ArrayLike]) -> npt.NDArray[np.float64]:
    if isinstance(field, DescriptorField):
        return field.values
    return DescriptorField(field).values


def encode_descriptors(field: DescriptorField) -> bytes:
    header = HEADER.pack(MAGIC, field.width, field.height, field.dim)
    return header + field.values.astype("<f4").tobytes()


def decode_descriptors(data: bytes) -> DescriptorField:
    if len(data) < HEADER.size:
        raise FormatError("descriptor file shorter than its header")
    magic, width, height, dim = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad descriptor magic {magic!r}")
    expected = HEADER.size + 4 * width * height * dim
    if len(data) != expected:
        raise FormatError(f"descriptor file has {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=HEADER.size).reshape(height, width, dim)
    return DescriptorField(values.astype(np.float64))


def write_descriptors(path: Union[str, Path], field: DescriptorField) -> None:
    try:
        Path(path).write_bytes(encode_descriptors(field))
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e
    logger.debug("wrote %dx%dx%d descriptors to %s", field.width, field.height, field.dim, path)


def read_descriptors(path: Union[str, Path]) -> DescriptorField:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e
    return decode_descriptors(data)
