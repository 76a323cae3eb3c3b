"""Geometry-invariant DASC: per-superpixel scaled and rotated patterns with matching pre-blur"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from typing import Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..descriptor.dasc import DascParams, Interpolation, normalize_responses, responses_with_filter
from ..descriptor.dump import DescriptorField
from ..descriptor.patterns import SamplingPatternSet
from ..errors import DimensionError, ParameterError
from ..imaging.core import check_image, gaussian_blur
from ..imaging.eaf import FilterKind, FilterParams, make_filter
from .propagation import GeometricFieldMap
from .superpixels import SuperpixelMap

logger = logging.getLogger(__name__)


class BlurRule(StrEnum):
    INCREMENT = "increment"  # sqrt(G^2 - 0.25)
    PRINTED = "printed"  # (G^2 - 0.25)^(-1/2)


@dataclass
class GiDascConfig:
    blur_rule: BlurRule = BlurRule.INCREMENT
    interpolation: Interpolation = Interpolation.BILINEAR
    group_identical: bool = True

    def validate(self) -> None:
        assert BlurRule(self.blur_rule) in BlurRule, "unknown blur rule"
        assert Interpolation(self.interpolation) in Interpolation, "unknown interpolation"


@dataclass(eq=False)
class TransformedPatternSet:
    patterns: SamplingPatternSet
    g_rho: float
    g_theta: float
    patch_size: int

    @property
    def filter_radius(self) -> int:
        return max(1, self.patch_size // 2)


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def transform_patterns(
    base: SamplingPatternSet, g_rho: float, g_theta: float, patch_size: int = 5
) -> TransformedPatternSet:
    """Map every offset o to g_rho * R(g_theta) o; the patch grows to round(patch_size * g_rho)"""
    if not g_rho > 0 or not math.isfinite(g_rho):
        raise ParameterError(f"scale must be > 0, got {g_rho}")
    c, s = math.cos(g_theta), math.sin(g_theta)
    matrix = g_rho * np.array([[c, -s], [s, c]])
    patterns = SamplingPatternSet(
        base.sources @ matrix.T, base.targets @ matrix.T, base.weights.copy(), base.directions
    )
    return TransformedPatternSet(patterns, float(g_rho), float(g_theta), max(1, round_half_up(patch_size * g_rho)))


def blur_sigma(g_rho: float, rule: BlurRule = BlurRule.INCREMENT) -> float:
    increment = g_rho * g_rho - 0.25
    if increment <= 0:
        return 0.0
    if BlurRule(rule) == BlurRule.PRINTED:
        return 1.0 / math.sqrt(increment)
    return math.sqrt(increment)


def influence_padding(transformed: TransformedPatternSet, sigma: float) -> int:
    """Margin around a region beyond which no pixel affects its descriptors"""
    patterns = transformed.patterns
    reach_s = float(np.abs(patterns.sources).max(initial=0.0))
    reach_d = float(np.abs(patterns.offsets).max(initial=0.0))
    return int(math.ceil(reach_s + reach_d)) + 2 * transformed.filter_radius + int(math.ceil(3.0 * sigma)) + 2


def _groups(spmap: SuperpixelMap, fields: GeometricFieldMap, group_identical: bool) -> List[List[int]]:
    if not group_identical:
        return [[m] for m in range(spmap.count)]
    keyed: Dict[Tuple[float, float], List[int]] = {}
    for m in range(spmap.count):
        keyed.setdefault((float(fields.g_rho[m]), float(fields.g_theta[m])), []).append(m)
    return list(keyed.values())


def compute_gi_dasc(
    img: npt.ArrayLike,
    spmap: SuperpixelMap,
    fields: GeometricFieldMap,
    base: SamplingPatternSet,
    params: DascParams,
    config: Optional[GiDascConfig] = None,
    workers: int = 1,
) -> DescriptorField:
    """DASC per superpixel group over an extended, pre-blurred subimage, written back pixel-exactly"""
    config = config or GiDascConfig()
    config.validate()
    params.validate()
    img = check_image(img)
    if spmap.shape != img.shape:
        raise DimensionError(f"label map {spmap.shape} does not match image {img.shape}")
    if len(fields) != spmap.count:
        raise DimensionError(f"{len(fields)} fields for {spmap.count} superpixels")
    if np.any(~np.isfinite(fields.g_rho)) or np.any(fields.g_rho <= 0):
        raise ParameterError("every superpixel needs a finite scale > 0")
    if len(base) == 0:
        raise ParameterError("at least one sampling pattern is required")

    h, w = img.shape
    out = np.empty((h, w, len(base)), dtype=np.float64)
    boxes = spmap.bounding_boxes()
    groups = _groups(spmap, fields, config.group_identical)
    kind = FilterKind(params.weighting)

    def run(members: List[int]) -> None:
        g_rho, g_theta = float(fields.g_rho[members[0]]), float(fields.g_theta[members[0]])
        transformed = transform_patterns(base, g_rho, g_theta, params.patch_size)
        sigma = blur_sigma(g_rho, config.blur_rule)

        y0 = min(boxes[m][0].start for m in members)
        y1 = max(boxes[m][0].stop for m in members)
        x0 = min(boxes[m][1].start for m in members)
        x1 = max(boxes[m][1].stop for m in members)
        pad = influence_padding(transformed, sigma)
        y0, x0 = max(0, y0 - pad), max(0, x0 - pad)
        y1, x1 = min(h, y1 + pad), min(w, x1 + pad)
        radius = min(transformed.filter_radius, min(y1 - y0, x1 - x0) - 1)
        if radius < transformed.filter_radius:
            logger.warning(
                "filter radius %d reduced to %d to fit a %dx%d region",
                transformed.filter_radius,
                radius,
                x1 - x0,
                y1 - y0,
            )
        if radius < 1:
            raise ParameterError(f"region {x1 - x0}x{y1 - y0} is too small to describe")

        sub = gaussian_blur(img[y0:y1, x0:x1], sigma)
        flt = make_filter(sub, FilterParams(radius=radius, epsilon=params.epsilon, kind=kind))
        responses = responses_with_filter(sub, flt, transformed.patterns, params, 1, config.interpolation)
        normalized = normalize_responses(responses)

        local = spmap.labels[y0:y1, x0:x1]
        mask = np.isin(local, members)
        out[y0:y1, x0:x1][mask] = normalized[mask]

    logger.debug("describing %d superpixels in %d groups", spmap.count, len(groups))
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, groups))
    else:
        for members in groups:
            run(members)
    return DescriptorField(out)
