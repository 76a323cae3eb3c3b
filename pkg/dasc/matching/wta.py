"""Winner-takes-all stereo and flow matching over descriptor fields.

Descriptor distance is squared Euclidean. Flow follows a(x, y) <-> b(x + u, y + v);
stereo compares left(x, y) with right(x - d, y).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from ..descriptor.dump import DescriptorField, as_descriptor_values
from ..errors import DimensionError, ParameterError
from ..imaging.core import check_image, shift_image
from ..imaging.eaf import box_filter

logger = logging.getLogger(__name__)

FieldLike = Union[DescriptorField, npt.ArrayLike]


@dataclass(eq=False)
class DisparityMap:
    values: npt.NDArray[np.float64]
    valid: Optional[npt.NDArray[np.bool_]] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionError(f"disparity map must be 2-D, got shape {self.values.shape}")
        self.valid = np.isfinite(self.values) if self.valid is None else np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.values.shape:
            raise DimensionError("validity mask does not match the disparity map")


@dataclass(eq=False)
class FlowField:
    vectors: npt.NDArray[np.float64]
    valid: Optional[npt.NDArray[np.bool_]] = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 3 or self.vectors.shape[2] != 2:
            raise DimensionError(f"flow field must be H x W x 2, got shape {self.vectors.shape}")
        if self.valid is None:
            self.valid = np.all(np.isfinite(self.vectors), axis=2)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.vectors.shape[:2]:
            raise DimensionError("validity mask does not match the flow field")

    @property
    def u(self) -> np.ndarray:
        return self.vectors[:, :, 0]

    @property
    def v(self) -> np.ndarray:
        return self.vectors[:, :, 1]

    @classmethod
    def uniform(cls, height: int, width: int, u: float, v: float) -> "FlowField":
        vectors = np.empty((height, width, 2))
        vectors[:, :, 0] = u
        vectors[:, :, 1] = v
        return cls(vectors)


def _pair(a: FieldLike, b: FieldLike):
    va, vb = as_descriptor_values(a), as_descriptor_values(b)
    if va.shape != vb.shape:
        raise DimensionError(f"descriptor fields differ: {va.shape} vs {vb.shape}")
    return va, vb


def match_stereo_wta(left: FieldLike, right: FieldLike, max_disp: int, direction: int = -1) -> DisparityMap:
    """Per pixel the disparity in [0, max_disp] of least distance.

    left(x, y) is compared with right(x + direction * d, y); direction +1 searches
    mirrored pairs. Out-of-bounds candidates are skipped; ties go to the smaller d.
    """
    if max_disp < 0:
        raise ParameterError(f"max_disp must be >= 0, got {max_disp}")
    if direction not in (-1, 1):
        raise ParameterError(f"direction must be -1 or 1, got {direction}")
    lv, rv = _pair(left, right)
    h, w, _ = lv.shape
    best_cost = np.full((h, w), np.inf)
    best_disp = np.zeros((h, w), dtype=np.float64)
    for d in range(min(max_disp, w - 1) + 1):
        if direction < 0:
            target, cost = slice(d, w), np.sum((lv[:, d:] - rv[:, : w - d]) ** 2, axis=2)
        else:
            target, cost = slice(0, w - d), np.sum((lv[:, : w - d] - rv[:, d:]) ** 2, axis=2)
        region = best_cost[:, target]
        better = cost < region
        region[better] = cost[better]
        best_disp[:, target][better] = d
    return DisparityMap(best_disp, np.isfinite(best_cost))


def match_flow_wta(a: FieldLike, b: FieldLike, radius: int) -> FlowField:
    """Per pixel the displacement in the (2r+1)^2 window of least distance; ties to smaller (v, u)"""
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    av, bv = _pair(a, b)
    h, w, _ = av.shape
    best_cost = np.full((h, w), np.inf)
    flow = np.zeros((h, w, 2), dtype=np.float64)
    for v in range(-radius, radius + 1):
        ya0, ya1 = max(0, -v), min(h, h - v)
        if ya0 >= ya1:
            continue
        for u in range(-radius, radius + 1):
            xa0, xa1 = max(0, -u), min(w, w - u)
            if xa0 >= xa1:
                continue
            diff = av[ya0:ya1, xa0:xa1] - bv[ya0 + v : ya1 + v, xa0 + u : xa1 + u]
            cost = np.sum(diff * diff, axis=2)
            region = best_cost[ya0:ya1, xa0:xa1]
            better = cost < region
            region[better] = cost[better]
            flow[ya0:ya1, xa0:xa1][better] = (u, v)
    logger.debug("flow search over %d candidates", (2 * radius + 1) ** 2)
    return FlowField(flow, np.isfinite(best_cost))


def raw_intensity_stereo_wta(left: npt.ArrayLike, right: npt.ArrayLike, max_disp: int, radius: int = 2) -> DisparityMap:
    """Window-aggregated intensity SSD with the same search and tie rules, as a photometric baseline"""
    if max_disp < 0:
        raise ParameterError(f"max_disp must be >= 0, got {max_disp}")
    left = check_image(left, "left")
    right = check_image(right, "right")
    if left.shape != right.shape:
        raise DimensionError(f"stereo images differ: {left.shape} vs {right.shape}")
    h, w = left.shape
    best_cost = np.full((h, w), np.inf)
    best_disp = np.zeros((h, w), dtype=np.float64)
    cols = np.arange(w)
    for d in range(min(max_disp, w - 1) + 1):
        diff = left - shift_image(right, (-d, 0))
        cost = box_filter(diff * diff, radius)
        cost[:, cols < d] = np.inf
        better = cost < best_cost
        best_cost[better] = cost[better]
        best_disp[better] = d
    return DisparityMap(best_disp, np.isfinite(best_cost))
