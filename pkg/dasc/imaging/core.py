"""Grayscale images, Gaussian blur, blur-only pyramids and shifted copies"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import ndimage

from ..errors import DimensionError, ParameterError

logger = logging.getLogger(__name__)

# Images are 2-D float64 arrays indexed [y, x] with values in [0, 1]
Image = npt.NDArray[np.float64]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def check_image(img: npt.ArrayLike, name: str = "image") -> Image:
    """Return `img` as a float64 2-D array, rejecting empty or non-finite input"""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be at least 1x1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what} differ in shape: {a.shape} vs {b.shape}")


def to_grayscale(color: Union[npt.ArrayLike, Sequence[npt.ArrayLike]]) -> Image:
    """Luminance 0.299R + 0.587G + 0.114B, clamped to [0, 1].

    Accepts an (H, W, 3) array or a sequence of three (H, W) channel arrays.
    """
    if isinstance(color, (list, tuple)):
        if len(color) != 3:
            raise DimensionError(f"expected 3 channels, got {len(color)}")
        channels = [np.asarray(c, dtype=np.float64) for c in color]
        if any(c.shape != channels[0].shape for c in channels[1:]):
            raise DimensionError(f"channel shapes differ: {[c.shape for c in channels]}")
        if channels[0].ndim != 2:
            raise DimensionError(f"channels must be 2-D, got shape {channels[0].shape}")
    else:
        arr = np.asarray(color, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DimensionError(f"color image must have shape (H, W, 3), got {arr.shape}")
        channels = [arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]]

    wr, wg, wb = LUMA_WEIGHTS
    gray = wr * channels[0] + wg * channels[1] + wb * channels[2]
    return np.clip(gray, 0.0, 1.0)


def gaussian_kernel(sigma: float) -> npt.NDArray[np.float64]:
    """Normalized 1-D Gaussian kernel with radius ceil(3 * sigma)"""
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(img: npt.ArrayLike, sigma: float) -> Image:
    """Separable Gaussian blur with replicate border padding; sigma = 0 returns a copy"""
    if sigma < 0 or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be a finite value >= 0, got {sigma}")
    img = check_image(img)
    if sigma == 0:
        return img.copy()
    kernel = gaussian_kernel(sigma)
    out = ndimage.correlate1d(img, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


@dataclass
class Pyramid:
    """Blur-only Gaussian pyramid: every level has the input's dimensions"""

    levels: List[Image] = field(default_factory=list)
    sigmas: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels)


def build_pyramid(
    img: npt.ArrayLike, n_levels: int = 4, base_sigma: float = 1.0, step: float = math.sqrt(2.0)
) -> Pyramid:
    """Level k (1-based) is the input blurred with base_sigma * step**(k-1)"""
    if n_levels < 1:
        raise ParameterError(f"n_levels must be >= 1, got {n_levels}")
    if base_sigma < 0:
        raise ParameterError(f"base_sigma must be >= 0, got {base_sigma}")
    if n_levels > 1 and (base_sigma <= 0 or step <= 1.0):
        raise ParameterError("pyramid sigmas must be strictly increasing: need base_sigma > 0 and step > 1")

    img = check_image(img)
    pyramid = Pyramid()
    for k in range(n_levels):
        sigma = base_sigma * step**k
        pyramid.levels.append(gaussian_blur(img, sigma))
        pyramid.sigmas.append(sigma)
    logger.debug("built %d-level pyramid with sigmas %s", n_levels, pyramid.sigmas)
    return pyramid


def _clamped_indices(n: int, offset: int) -> npt.NDArray[np.intp]:
    return np.clip(np.arange(n) + offset, 0, n - 1)


def shift_image(img: npt.ArrayLike, offset: Tuple[int, int]) -> Image:
    """output(x, y) = img(x + dx, y + dy) with replicate padding at the borders"""
    img = np.asarray(img, dtype=np.float64)
    dx, dy = int(offset[0]), int(offset[1])
    if dx == 0 and dy == 0:
        return img.copy()
    rows = _clamped_indices(img.shape[0], dy)
    cols = _clamped_indices(img.shape[1], dx)
    return img[np.ix_(rows, cols)]


def sample_shifted(img: npt.ArrayLike, offset: Tuple[float, float]) -> Image:
    """Real-valued shift: bilinear sampling at (x + dx, y + dy), replicate borders"""
    dx, dy = float(offset[0]), float(offset[1])
    if dx.is_integer() and dy.is_integer():
        return shift_image(img, (int(dx), int(dy)))

    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    ys = np.clip(np.arange(h, dtype=np.float64) + dy, 0, h - 1)
    xs = np.clip(np.arange(w, dtype=np.float64) + dx, 0, w - 1)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(img, [grid_y, grid_x], order=1, mode="nearest")
