"""Constant-time edge-aware filtering: box, Gaussian and guided filters.

Every filter is bound to one guidance image so that guidance statistics are shared
across all sources filtered with it. Besides the fast whole-image path each filter
can list the explicit weights realising its output at a single pixel; the direct
nested-loop descriptor paths are built on those weights.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple, Optional

import numpy as np
import numpy.typing as npt
from scipy import ndimage

from ..errors import DimensionError, ParameterError
from .core import Image, check_image, check_same_shape

logger = logging.getLogger(__name__)


class FilterKind(StrEnum):
    GUIDED = "guided"
    BOX = "box"
    GAUSSIAN = "gaussian"


@dataclass
class FilterParams:
    """Support radius and regularizer of the weighting filter"""

    radius: int = 2
    epsilon: float = 0.0009
    kind: FilterKind = FilterKind.GUIDED
    sigma: Optional[float] = None  # Gaussian weighting only; defaults to radius / 2

    def validate(self) -> None:
        assert self.radius >= 1, "radius must be >= 1"
        assert math.isfinite(self.epsilon) and self.epsilon >= 0, "epsilon must be finite and >= 0"
        assert FilterKind(self.kind) in FilterKind, "unknown filter kind"
        assert self.sigma is None or self.sigma > 0, "sigma must be > 0"

    @property
    def gaussian_sigma(self) -> float:
        return self.sigma if self.sigma is not None else self.radius / 2.0


class PixelWeights(NamedTuple):
    """Explicit weights of one output pixel.

    `rows`/`cols` are the (border-clamped) source positions, `dy`/`dx` the virtual
    offsets from the output pixel before clamping. Weights may repeat a position.
    """

    rows: npt.NDArray[np.intp]
    cols: npt.NDArray[np.intp]
    dy: npt.NDArray[np.intp]
    dx: npt.NDArray[np.intp]
    weights: npt.NDArray[np.float64]


def _check_radius(shape, radius: int) -> None:
    if radius < 1:
        raise ParameterError(f"filter radius must be >= 1, got {radius}")
    if radius >= min(shape):
        raise ParameterError(f"filter radius {radius} must be smaller than the image size {shape[1]}x{shape[0]}")


def box_filter(img: npt.ArrayLike, radius: int) -> Image:
    """Mean over the (2r+1)^2 window with replicate padding, via an integral image"""
    img = np.asarray(img, dtype=np.float64)
    _check_radius(img.shape, radius)

    h, w = img.shape
    size = 2 * radius + 1
    padded = np.pad(img, radius, mode="edge")
    integral = np.zeros((h + size, w + size), dtype=np.float64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=integral[1:, 1:])

    sums = integral[size:, size:] - integral[:-size, size:] - integral[size:, :-size] + integral[:-size, :-size]
    return sums / float(size * size)


def _window_offsets(radius: int):
    k = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(k, k, indexing="ij")
    return dy.ravel(), dx.ravel()


class WeightedFilter(ABC):
    """A linear filter bound to a guidance image"""

    kind: FilterKind

    def __init__(self, guidance: npt.ArrayLike, radius: int):
        self.guidance = check_image(guidance, "guidance")
        _check_radius(self.guidance.shape, radius)
        self.radius = radius
        self.shape = self.guidance.shape

    @property
    def window_size(self) -> int:
        return (2 * self.radius + 1) ** 2

    def __call__(self, src: npt.ArrayLike) -> Image:
        src = np.asarray(src, dtype=np.float64)
        if src.shape != self.shape:
            raise DimensionError(f"source shape {src.shape} does not match guidance shape {self.shape}")
        return self._apply(src)

    def _clamp(self, rows: np.ndarray, cols: np.ndarray):
        h, w = self.shape
        return np.clip(rows, 0, h - 1), np.clip(cols, 0, w - 1)

    @abstractmethod
    def _apply(self, src: Image) -> Image:
        raise NotImplementedError

    @abstractmethod
    def weights_at(self, y: int, x: int) -> PixelWeights:
        """Weights such that output(y, x) = sum(weights * src[rows, cols])"""
        raise NotImplementedError


class BoxFilter(WeightedFilter):
    kind = FilterKind.BOX

    def _apply(self, src: Image) -> Image:
        return box_filter(src, self.radius)

    def weights_at(self, y: int, x: int) -> PixelWeights:
        dy, dx = _window_offsets(self.radius)
        rows, cols = self._clamp(y + dy, x + dx)
        weights = np.full(dy.shape, 1.0 / self.window_size)
        return PixelWeights(rows, cols, dy, dx, weights)


class GaussianFilter(WeightedFilter):
    """Gaussian weights truncated at the filter radius"""

    kind = FilterKind.GAUSSIAN

    def __init__(self, guidance: npt.ArrayLike, radius: int, sigma: Optional[float] = None):
        super().__init__(guidance, radius)
        self.sigma = sigma if sigma is not None else radius / 2.0
        k = np.arange(-radius, radius + 1, dtype=np.float64)
        kernel = np.exp(-(k**2) / (2.0 * self.sigma**2))
        self.kernel = kernel / kernel.sum()

    def _apply(self, src: Image) -> Image:
        out = ndimage.correlate1d(src, self.kernel, axis=0, mode="nearest")
        return ndimage.correlate1d(out, self.kernel, axis=1, mode="nearest")

    def weights_at(self, y: int, x: int) -> PixelWeights:
        dy, dx = _window_offsets(self.radius)
        rows, cols = self._clamp(y + dy, x + dx)
        weights = self.kernel[dy + self.radius] * self.kernel[dx + self.radius]
        return PixelWeights(rows, cols, dy, dx, weights)


class GuidedFilter(WeightedFilter):
    """Guided filter: output = mean(a) * I + mean(b) with a, b fitted per window.

    Windows whose regularized variance is zero get a = 0, b = mean(src).
    """

    kind = FilterKind.GUIDED

    def __init__(self, guidance: npt.ArrayLike, radius: int, epsilon: float):
        super().__init__(guidance, radius)
        self.epsilon = float(epsilon)
        self.mean_i = box_filter(self.guidance, radius)
        self.var_i = np.maximum(box_filter(self.guidance * self.guidance, radius) - self.mean_i**2, 0.0)
        self.denom = self.var_i + self.epsilon
        self.flat = self.denom <= 0.0
        self._inv_denom = np.where(self.flat, 0.0, 1.0 / np.where(self.flat, 1.0, self.denom))

    def _apply(self, src: Image) -> Image:
        r = self.radius
        mean_p = box_filter(src, r)
        cov = box_filter(self.guidance * src, r) - self.mean_i * mean_p
        a = cov * self._inv_denom
        b = mean_p - a * self.mean_i
        return box_filter(a, r) * self.guidance + box_filter(b, r)

    def weights_at(self, y: int, x: int) -> PixelWeights:
        n = self.window_size
        k1y, k1x = _window_offsets(self.radius)
        c_rows, c_cols = self._clamp(y + k1y, x + k1x)

        # every window centre c1 covering (y, x) contributes one weight per pixel of its own window
        k2y, k2x = _window_offsets(self.radius)
        q_rows, q_cols = self._clamp(c_rows[:, None] + k2y[None, :], c_cols[:, None] + k2x[None, :])
        mu = self.mean_i[c_rows, c_cols][:, None]
        inv = self._inv_denom[c_rows, c_cols][:, None]
        g_p = self.guidance[y, x]
        g_q = self.guidance[q_rows, q_cols]
        weights = (1.0 / n) * ((g_p - mu) * (g_q - mu) * inv / n + 1.0 / n)

        dy = (k1y[:, None] + k2y[None, :]).ravel()
        dx = (k1x[:, None] + k2x[None, :]).ravel()
        return PixelWeights(q_rows.ravel(), q_cols.ravel(), dy, dx, weights.ravel())


def make_filter(guidance: npt.ArrayLike, params: FilterParams) -> WeightedFilter:
    """Build the weighting filter selected by `params.kind`, bound to `guidance`"""
    params.validate()
    kind = FilterKind(params.kind)
    if kind == FilterKind.GUIDED:
        return GuidedFilter(guidance, params.radius, params.epsilon)
    if kind == FilterKind.BOX:
        return BoxFilter(guidance, params.radius)
    return GaussianFilter(guidance, params.radius, params.gaussian_sigma)


def guided_filter(guidance: npt.ArrayLike, src: npt.ArrayLike, params: FilterParams) -> Image:
    guidance = check_image(guidance, "guidance")
    src = check_image(src, "source")
    check_same_shape(guidance, src, "guidance and source")
    params.validate()
    return GuidedFilter(guidance, params.radius, params.epsilon)(src)
