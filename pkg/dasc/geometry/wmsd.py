"""Weighted maximal self-dissimilarity keypoints.

Each pyramid level gets one weighted-SSD map per centre-anchored pattern,

    phi = U_i2 + U_ij2 - 2 U_iij,

computed with weights guided by the level itself. Pattern rings and weighting
windows grow with the level's blur (sigma_k / sigma_0), so a structure gives
its strongest response at the level matching its size. The response sums the
`o` smallest maps per pixel; keypoints are strict extrema of the response over
position and scale, oriented by a histogram of the selected directions.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import ndimage

from ..descriptor.dasc import check_finite
from ..descriptor.patterns import (
    SamplingPatternSet,
    center_anchored_patterns,
    generate_log_polar_grid,
    round_half_away,
)
from ..errors import FormatError, ImageIOError, ParameterError
from ..imaging.core import Image, build_pyramid, check_image, sample_shifted, shift_image
from ..imaging.eaf import FilterKind, FilterParams, make_filter

logger = logging.getLogger(__name__)

# responses at or below this are rounding residue of flat regions
RESPONSE_FLOOR = 1e-10


@dataclass
class WmsdConfig:
    """
    Detector configuration.

    - n_rho, n_theta, radius: centre-anchored pattern rings at the first level
    - o: number of smallest dissimilarities summed into the response
    - n_levels, base_sigma, step: blur-only pyramid
    - threshold_ratio: keep responses above this fraction of the per-level median of positive responses
    - include_minima: also report strict minima of the response
    - patch_size, epsilon, weighting: weighting filter (radius = patch_size // 2 at the first level)
    """

    n_rho: int = 3
    n_theta: int = 12
    radius: int = 7
    o: int = 10
    n_levels: int = 4
    base_sigma: float = 1.0
    step: float = math.sqrt(2.0)
    threshold_ratio: float = 0.6
    include_minima: bool = False
    patch_size: int = 5
    epsilon: float = 0.0009
    weighting: FilterKind = FilterKind.GUIDED

    def validate(self) -> None:
        assert self.n_rho >= 1 and self.n_theta >= 1, "n_rho and n_theta must be >= 1"
        assert self.radius >= 1, "radius must be >= 1"
        assert 1 <= self.o <= self.n_rho * self.n_theta, "o must be in [1, n_rho * n_theta]"
        assert self.n_levels >= 1, "n_levels must be >= 1"
        assert self.base_sigma > 0, "base_sigma must be > 0"
        assert self.step > 1, "step must be > 1"
        assert self.threshold_ratio >= 0, "threshold_ratio must be >= 0"
        assert self.patch_size >= 3 and self.patch_size % 2 == 1, "patch_size must be odd and >= 3"
        assert self.epsilon >= 0, "epsilon must be >= 0"

    def filter_params(self, level: int = 0) -> FilterParams:
        radius = max(1, int(round_half_away(self.patch_size // 2 * self.level_scale(level))))
        return FilterParams(radius=radius, epsilon=self.epsilon, kind=FilterKind(self.weighting))

    def level_scale(self, level: int) -> float:
        """sigma_k / sigma_0 for the 0-based pyramid level k"""
        return self.step**level

    def pattern_radius(self, level: int = 0) -> int:
        return int(round_half_away(self.radius * self.level_scale(level)))


@dataclass
class Keypoint:
    x: float
    y: float
    rho: float
    theta: float = 0.0
    level: int = -1
    response: float = 0.0
    degenerate: bool = False


@dataclass(eq=False)
class ResponseStack:
    """Per-level responses, dissimilarity maps (L, H, W) and selected direction indices (o, H, W).

    `patterns` and `radii` hold the magnified pattern set of each level and its outer ring radius.
    """

    omegas: List[Image] = field(default_factory=list)
    phis: List[np.ndarray] = field(default_factory=list)
    selected: List[np.ndarray] = field(default_factory=list)
    sigmas: List[float] = field(default_factory=list)
    patterns: List[SamplingPatternSet] = field(default_factory=list)
    radii: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.omegas)


def wmsd_patterns(n_rho: int = 3, n_theta: int = 12, radius: int = 7) -> SamplingPatternSet:
    """Pairs (centre, ring point) for every ring point; `directions` keeps each ideal angle"""
    return center_anchored_patterns(generate_log_polar_grid(n_rho, n_theta, radius))


def _shift(values: np.ndarray, offset) -> np.ndarray:
    if float(offset[0]).is_integer() and float(offset[1]).is_integer():
        return shift_image(values, (int(offset[0]), int(offset[1])))
    return sample_shifted(values, (float(offset[0]), float(offset[1])))


def self_dissimilarity(level: npt.ArrayLike, patterns: SamplingPatternSet, params: FilterParams) -> np.ndarray:
    """Weighted SSD between the patch at s and the patch at t, one (H, W) map per pattern, clamped at 0"""
    level = check_image(level, "level")
    flt = make_filter(level, params)
    u_i2 = flt(level * level)
    out = np.empty((len(patterns),) + level.shape, dtype=np.float64)
    for l, (s, t) in enumerate(zip(patterns.sources, patterns.targets)):
        fj = _shift(level, t - s)
        phi = u_i2 + flt(fj * fj) - 2.0 * flt(level * fj)
        check_finite(phi, f"dissimilarity for pattern {l}")
        out[l] = _shift(np.maximum(phi, 0.0), s)
    return out


def self_dissimilarity_oracle(level: npt.ArrayLike, patterns: SamplingPatternSet, params: FilterParams) -> np.ndarray:
    """Direct weighted sum of squared differences per pixel, for integer patterns"""
    level = check_image(level, "level")
    if not patterns.is_integral:
        raise ParameterError("the direct dissimilarity path needs integer pattern offsets")
    flt = make_filter(level, params)
    h, w = level.shape
    sources = patterns.sources.astype(np.int64)
    d = (patterns.targets - patterns.sources).astype(np.int64)
    out = np.empty((len(patterns), h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            for l in range(len(patterns)):
                sy = int(np.clip(y + sources[l, 1], 0, h - 1))
                sx = int(np.clip(x + sources[l, 0], 0, w - 1))
                pw = flt.weights_at(sy, sx)
                fi = level[pw.rows, pw.cols]
                fj = level[np.clip(pw.rows + d[l, 1], 0, h - 1), np.clip(pw.cols + d[l, 0], 0, w - 1)]
                out[l, y, x] = max(float(np.dot(pw.weights, (fi - fj) ** 2)), 0.0)
    return out


def response_map(phi_maps: npt.ArrayLike, o: int) -> Tuple[Image, np.ndarray]:
    """Sum of the `o` smallest maps per pixel, plus the (o, H, W) indices of those maps"""
    phi = np.asarray(phi_maps, dtype=np.float64)
    if o < 1:
        raise ParameterError(f"o must be >= 1, got {o}")
    if o > phi.shape[0]:
        raise ParameterError(f"o = {o} exceeds the {phi.shape[0]} dissimilarity maps")
    selected = np.argsort(phi, axis=0, kind="stable")[:o]
    omega = np.take_along_axis(phi, selected, axis=0).sum(axis=0)
    return omega, selected


def compute_response_stack(img: npt.ArrayLike, config: WmsdConfig, workers: int = 1) -> ResponseStack:
    config.validate()
    pyramid = build_pyramid(img, config.n_levels, config.base_sigma, config.step)
    radii = [config.pattern_radius(k) for k in range(config.n_levels)]
    patterns = [wmsd_patterns(config.n_rho, config.n_theta, r) for r in radii]

    def level_response(k: int):
        phi = self_dissimilarity(pyramid.levels[k], patterns[k], config.filter_params(k))
        omega, selected = response_map(phi, config.o)
        return phi, omega, selected

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(level_response, range(config.n_levels)))
    else:
        results = [level_response(k) for k in range(config.n_levels)]

    stack = ResponseStack(sigmas=list(pyramid.sigmas), patterns=patterns, radii=radii)
    for phi, omega, selected in results:
        stack.phis.append(phi)
        stack.omegas.append(omega)
        stack.selected.append(selected)
    logger.debug("pattern radii per level: %s", radii)
    return stack


def level_threshold(omega: Image, ratio: float) -> Optional[float]:
    """ratio x median of the responses above RESPONSE_FLOOR, None when the level has none"""
    positive = omega[omega > RESPONSE_FLOOR]
    if positive.size == 0:
        return None
    return ratio * float(np.median(positive))


def detect_keypoints(
    stack: ResponseStack,
    threshold: Optional[float] = None,
    threshold_ratio: float = 0.6,
    include_minima: bool = False,
    border: Union[int, Sequence[int]] = 0,
) -> List[Keypoint]:
    """Strict extrema of the response over the 26-neighbourhood in (x, y, scale).

    Only interior levels are searched. With `threshold` None each level uses
    `threshold_ratio` x the median of its positive responses. `border` is one
    margin for every level or one per level.
    """
    if len(stack) < 3:
        logger.debug("response stack has %d levels; no interior scales to search", len(stack))
        return []

    volume = np.stack(stack.omegas)
    footprint = np.ones((3, 3, 3), dtype=bool)
    footprint[1, 1, 1] = False
    neighbour_max = ndimage.maximum_filter(volume, footprint=footprint, mode="nearest")
    extrema = volume > neighbour_max
    if include_minima:
        extrema |= volume < ndimage.minimum_filter(volume, footprint=footprint, mode="nearest")

    _, h, w = volume.shape
    borders = [border] * len(stack) if isinstance(border, int) else list(border)
    if len(borders) != len(stack):
        raise ParameterError(f"expected {len(stack)} borders, got {len(borders)}")
    keypoints = []
    for k in range(1, len(stack) - 1):
        level_t = threshold if threshold is not None else level_threshold(stack.omegas[k], threshold_ratio)
        if level_t is None:
            continue
        mask = extrema[k] & (volume[k] > max(level_t, RESPONSE_FLOOR))
        b = borders[k]
        if b > 0:
            mask[:b, :] = False
            mask[h - b :, :] = False
            mask[:, :b] = False
            mask[:, w - b :] = False
        for y, x in np.argwhere(mask):
            keypoints.append(
                Keypoint(x=float(x), y=float(y), rho=stack.sigmas[k], level=k, response=float(volume[k, y, x]))
            )
    logger.debug("detected %d keypoints", len(keypoints))
    return keypoints


def _direction_bins(patterns: SamplingPatternSet, n_theta: Optional[int]) -> Tuple[np.ndarray, int]:
    directions = patterns.directions
    if directions is None:
        offsets = patterns.offsets
        directions = np.mod(np.arctan2(offsets[:, 1], offsets[:, 0]), 2.0 * math.pi)
    if n_theta is None:
        n_theta = len(np.unique(np.round(np.mod(directions, 2.0 * math.pi), 9)))
    width = 2.0 * math.pi / n_theta
    bins = np.mod(np.rint(np.mod(directions, 2.0 * math.pi) / width).astype(np.int64), n_theta)
    return bins, n_theta


def orientation_histogram(
    keypoint: Keypoint, phi_maps: np.ndarray, patterns: SamplingPatternSet, o: int, n_theta: Optional[int] = None
) -> np.ndarray:
    """Dissimilarity mass of the `o` selected directions, accumulated per direction bin"""
    phi = np.asarray(phi_maps, dtype=np.float64)
    x, y = int(round(keypoint.x)), int(round(keypoint.y))
    values = phi[:, y, x]
    selected = np.argsort(values, kind="stable")[:o]
    bins, n_theta = _direction_bins(patterns, n_theta)
    return np.bincount(bins[selected], weights=values[selected], minlength=n_theta)


def estimate_orientation(
    keypoint: Keypoint, phi_maps: np.ndarray, patterns: SamplingPatternSet, o: int, n_theta: Optional[int] = None
) -> Tuple[float, bool]:
    """Centre angle of the heaviest bin (ties to the smaller angle); (0, True) for an empty histogram"""
    if o < 1:
        raise ParameterError(f"o must be >= 1, got {o}")
    hist = orientation_histogram(keypoint, phi_maps, patterns, o, n_theta)
    if not np.any(hist > 0):
        return 0.0, True
    best = int(np.argmax(hist))
    return best * 2.0 * math.pi / len(hist), False


def detect_wmsd(img: npt.ArrayLike, config: WmsdConfig, workers: int = 1) -> Tuple[List[Keypoint], ResponseStack]:
    """Pyramid, responses, extrema and orientations in one pass"""
    stack = compute_response_stack(img, config, workers)
    keypoints = detect_keypoints(
        stack, threshold_ratio=config.threshold_ratio, include_minima=config.include_minima, border=stack.radii
    )
    for kp in keypoints:
        kp.theta, kp.degenerate = estimate_orientation(
            kp, stack.phis[kp.level], stack.patterns[kp.level], config.o, config.n_theta
        )
    degenerate = sum(kp.degenerate for kp in keypoints)
    if degenerate:
        logger.warning("%d keypoints have no orientation evidence; orientation set to 0", degenerate)
    return keypoints, stack


def format_keypoints(keypoints: List[Keypoint]) -> str:
    return "".join(f"{kp.x!r} {kp.y!r} {kp.rho!r} {kp.theta!r}\n" for kp in keypoints)


def parse_keypoints(text: str) -> List[Keypoint]:
    keypoints = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"keypoint line {lineno}: expected x y rho theta")
        try:
            x, y, rho, theta = (float(p) for p in parts)
        except ValueError as e:
            raise FormatError(f"keypoint line {lineno}: {e}") from e
        if rho <= 0:
            raise FormatError(f"keypoint line {lineno}: scale must be > 0")
        keypoints.append(Keypoint(x=x, y=y, rho=rho, theta=theta))
    return keypoints


def write_keypoints(path: Union[str, Path], keypoints: List[Keypoint]) -> None:
    try:
        Path(path).write_text(format_keypoints(keypoints))
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def read_keypoints(path: Union[str, Path]) -> List[Keypoint]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e
    return parse_keypoints(text)
