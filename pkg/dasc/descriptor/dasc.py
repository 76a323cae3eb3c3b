"""Dense adaptive self-correlation descriptor: the efficient filtering pipeline.

For every unique displacement d = t - s the weighted correlation between the patch at
a pixel and the patch displaced by d is assembled from five filtered images:

    psi = (G_ij - G_i * G_j) / sqrt((G_i2 - G_i^2) * (G_j2 - G_j^2))

where G_x is `x` filtered with weights guided by the input image and `j` denotes the
input shifted by d. The robust similarity of psi is then re-indexed to every
descriptor slot by shifting it by s.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from typing import Dict, Tuple, Union

import numpy as np
import numpy.typing as npt

from ..errors import InternalError, ParameterError
from ..imaging.core import Image, check_image, sample_shifted, shift_image
from ..imaging.eaf import FilterKind, FilterParams, WeightedFilter, make_filter
from .dump import DescriptorField
from .patterns import SamplingPatternSet, round_half_away, support_radius

logger = logging.getLogger(__name__)

# variance below this makes a patch degenerate (psi := 0)
VAR_FLOOR = 1e-12


class Interpolation(StrEnum):
    BILINEAR = "bilinear"
    NEAREST = "nearest"


@dataclass
class DascParams:
    """
    Descriptor parameters.

    - sigma_c: bandwidth of the robust similarity
    - tau_c: truncation floor of the robust similarity
    - patch_size: patch side N (odd); the weighting filter radius is N // 2
    - support_size: support window side M (odd); offsets must satisfy |o| <= M // 2 - N // 2
    - dim: number of descriptor slots used when patterns are drawn automatically
    - epsilon: guided filter regularizer
    - weighting: filter producing the patch weights
    """

    sigma_c: float = 0.5
    tau_c: float = 0.03
    patch_size: int = 5
    support_size: int = 31
    dim: int = 128
    epsilon: float = 0.0009
    weighting: FilterKind = FilterKind.GUIDED

    def validate(self) -> None:
        assert self.sigma_c > 0, "sigma_c must be > 0"
        assert 0 < self.tau_c < 1, "tau_c must be in (0, 1)"
        assert self.patch_size >= 3 and self.patch_size % 2 == 1, "patch_size must be odd and >= 3"
        assert self.support_size % 2 == 1, "support_size must be odd"
        assert self.support_size > self.patch_size, "support_size must exceed patch_size"
        assert self.dim >= 1, "dim must be >= 1"
        assert math.isfinite(self.epsilon) and self.epsilon >= 0, "epsilon must be finite and >= 0"
        assert FilterKind(self.weighting) in FilterKind, "unknown weighting"

    @property
    def max_offset(self) -> int:
        return support_radius(self.patch_size, self.support_size)

    def filter_params(self) -> FilterParams:
        return FilterParams(radius=self.patch_size // 2, epsilon=self.epsilon, kind=FilterKind(self.weighting))


def robust_similarity(psi: Union[float, npt.ArrayLike], sigma_c: float, tau_c: float):
    """max(exp(-(1 - |psi|) / sigma_c), tau_c)"""
    value = np.maximum(np.exp(-(1.0 - np.abs(psi)) / sigma_c), tau_c)
    return float(value) if np.ndim(value) == 0 else value


def check_finite(values: np.ndarray, what: str) -> None:
    """Raise InternalError naming the first pixel holding a non-finite value"""
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = np.argwhere(bad)[0]
        raise InternalError(f"non-finite {what}", location=(int(where[1]), int(where[0])))


def check_support(patterns: SamplingPatternSet, params: DascParams) -> None:
    longest = patterns.max_offset_length()
    if longest > params.max_offset + 1e-9:
        raise ParameterError(
            f"pattern offset of length {longest:.3f} exceeds the support limit {params.max_offset} "
            f"(patch {params.patch_size}, support {params.support_size})"
        )


def correlation_from_moments(
    g_i: np.ndarray, var_i: np.ndarray, g_j: np.ndarray, g_j2: np.ndarray, g_ij: np.ndarray
) -> np.ndarray:
    """Normalized correlation from weighted moments, clipped to [-1, 1]; degenerate patches give 0"""
    var_j = g_j2 - g_j * g_j
    degenerate = (var_i < VAR_FLOOR) | (var_j < VAR_FLOOR)
    denom = np.sqrt(np.where(degenerate, 1.0, var_i * var_j))
    psi = np.where(degenerate, 0.0, (g_ij - g_i * g_j) / denom)
    return np.clip(psi, -1.0, 1.0)


OffsetKey = Tuple[float, float]


class _ResponseEngine:
    """Shares the guidance statistics of one image across all offsets"""

    def __init__(self, img: Image, flt: WeightedFilter, params: DascParams, interpolation: Interpolation):
        self.img = img
        self.flt = flt
        self.params = params
        self.interpolation = Interpolation(interpolation)
        self.g_i = flt(img)
        self.var_i = flt(img * img) - self.g_i**2

    def shift(self, values: np.ndarray, offset: OffsetKey) -> np.ndarray:
        if float(offset[0]).is_integer() and float(offset[1]).is_integer():
            return shift_image(values, (int(offset[0]), int(offset[1])))
        return sample_shifted(values, offset)

    def similarity(self, d: OffsetKey) -> np.ndarray:
        fj = self.shift(self.img, d)
        g_j = self.flt(fj)
        g_j2 = self.flt(fj * fj)
        g_ij = self.flt(self.img * fj)
        psi = correlation_from_moments(self.g_i, self.var_i, g_j, g_j2, g_ij)
        check_finite(psi, f"correlation for offset {d}")
        return robust_similarity(psi, self.params.sigma_c, self.params.tau_c)


def _prepare_offsets(patterns: SamplingPatternSet, interpolation: Interpolation):
    sources, targets = patterns.sources, patterns.targets
    if Interpolation(interpolation) == Interpolation.NEAREST:
        sources = round_half_away(sources).astype(np.float64)
        targets = round_half_away(targets).astype(np.float64)
    return sources, targets


def responses_with_filter(
    img: Image,
    flt: WeightedFilter,
    patterns: SamplingPatternSet,
    params: DascParams,
    workers: int = 1,
    interpolation: Interpolation = Interpolation.BILINEAR,
) -> np.ndarray:
    """Pre-normalisation responses (H, W, L) for an explicit weighting filter.

    Offsets may be real-valued: they are sampled bilinearly or rounded per `interpolation`.
    """
    if len(patterns) == 0:
        raise ParameterError("at least one sampling pattern is required")
    engine = _ResponseEngine(img, flt, params, interpolation)
    sources, targets = _prepare_offsets(patterns, interpolation)
    displacements = targets - sources

    unique: Dict[OffsetKey, int] = {}
    for d in displacements:
        unique.setdefault((float(d[0]), float(d[1])), len(unique))
    keys = list(unique)
    logger.debug("%d patterns reduce to %d unique offsets", len(patterns), len(keys))

    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            similarities = list(pool.map(engine.similarity, keys))
    else:
        similarities = [engine.similarity(k) for k in keys]

    h, w = img.shape
    out = np.empty((h, w, len(patterns)), dtype=np.float64)
    for l, (s, d) in enumerate(zip(sources, displacements)):
        similarity = similarities[unique[(float(d[0]), float(d[1]))]]
        out[:, :, l] = engine.shift(similarity, (float(s[0]), float(s[1])))
    check_finite(out, "descriptor response")
    return out


def dasc_responses(
    img: npt.ArrayLike,
    patterns: SamplingPatternSet,
    params: DascParams,
    workers: int = 1,
    interpolation: Interpolation = Interpolation.BILINEAR,
) -> np.ndarray:
    """Robust similarities before normalisation, values in [tau_c, 1]"""
    img = check_image(img)
    params.validate()
    check_support(patterns, params)
    flt = make_filter(img, params.filter_params())
    return responses_with_filter(img, flt, patterns, params, workers, interpolation)


def normalize_responses(responses: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(responses, axis=2, keepdims=True)
    check_finite(norms[:, :, 0], "descriptor norm")
    if np.any(norms <= 0):
        where = np.argwhere(norms[:, :, 0] <= 0)[0]
        raise InternalError("zero descriptor norm", location=(int(where[1]), int(where[0])))
    return responses / norms


def compute_dasc(
    img: npt.ArrayLike,
    patterns: SamplingPatternSet,
    params: DascParams,
    workers: int = 1,
    interpolation: Interpolation = Interpolation.BILINEAR,
) -> DescriptorField:
    """Unit-norm DASC descriptor at every pixel"""
    responses = dasc_responses(img, patterns, params, workers, interpolation)
    return DescriptorField(normalize_responses(responses))
