"""Log-polar point grids and sampling patterns (pairs of patch offsets).

Offsets are (dx, dy) pairs relative to the pixel being described.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import numpy.typing as npt

from ..errors import FormatError, ImageIOError, ParameterError

logger = logging.getLogger(__name__)


def round_half_away(values: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Round to the nearest integer, halves away from zero (symmetric under negation)"""
    values = np.round(np.asarray(values, dtype=np.float64), 9)
    return (np.sign(values) * np.floor(np.abs(values) + 0.5)).astype(np.int64)


def support_radius(patch_size: int, support_size: int) -> int:
    """Largest offset length that keeps a patch inside the support window"""
    return support_size // 2 - patch_size // 2


@dataclass(eq=False)
class LogPolarGrid:
    """Centre point plus `n_rho` rings of `n_theta` integer points.

    `angles` and `rings` keep the ideal direction and ring index of each point
    (ring -1 is the centre).
    """

    points: npt.NDArray[np.int64]
    n_rho: int
    n_theta: int
    max_radius: float
    radii: npt.NDArray[np.float64]
    angles: npt.NDArray[np.float64]
    rings: npt.NDArray[np.int64]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(eq=False)
class SamplingPatternSet:
    """Ordered pairs (s_l, t_l) of offsets shared by every pixel"""

    sources: npt.NDArray[np.float64]
    targets: npt.NDArray[np.float64]
    weights: Optional[npt.NDArray[np.float64]] = None
    directions: Optional[npt.NDArray[np.float64]] = None

    def __post_init__(self):
        self.sources = np.asarray(self.sources, dtype=np.float64).reshape(-1, 2)
        self.targets = np.asarray(self.targets, dtype=np.float64).reshape(-1, 2)
        if self.sources.shape != self.targets.shape:
            raise ParameterError(f"{len(self.sources)} sources but {len(self.targets)} targets")
        if not (np.all(np.isfinite(self.sources)) and np.all(np.isfinite(self.targets))):
            raise ParameterError("pattern offsets must be finite")
        if np.any(np.all(self.sources == self.targets, axis=1)):
            raise ParameterError("a sampling pattern must pair two distinct offsets")
        if self.weights is None:
            self.weights = np.ones(len(self.sources))
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if len(self.weights) != len(self.sources):
                raise ParameterError("one weight per pattern is required")

    def __len__(self) -> int:
        return len(self.sources)

    @property
    def offsets(self) -> npt.NDArray[np.float64]:
        """Displacements d_l = t_l - s_l"""
        return self.targets - self.sources

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.sources == np.round(self.sources)) and np.all(self.targets == np.round(self.targets)))

    def max_offset_length(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(max(np.hypot(*self.sources.T).max(), np.hypot(*self.targets.T).max()))

    def subset(self, indices: npt.ArrayLike) -> "SamplingPatternSet":
        indices = np.asarray(indices, dtype=np.intp)
        directions = None if self.directions is None else self.directions[indices]
        return SamplingPatternSet(self.sources[indices], self.targets[indices], self.weights[indices], directions)


def generate_log_polar_grid(n_rho: int, n_theta: int, max_radius: float) -> LogPolarGrid:
    """Log-polar point set with n_rho * n_theta + 1 distinct integer points.

    Ring radii are log-spaced from max(max_radius / n_rho, n_theta / 2pi) up to
    max_radius; ring points at angles 2pi a / n_theta. An ideal point whose rounding
    collides with an earlier point (or leaves the disc) takes the nearest unused
    integer point inside the disc.
    """
    if n_rho < 1 or n_theta < 1:
        raise ParameterError(f"n_rho and n_theta must be >= 1, got {n_rho}, {n_theta}")
    if max_radius < 1:
        raise ParameterError(f"max_radius must be >= 1, got {max_radius}")

    min_ring = n_theta / (2.0 * math.pi)
    if min_ring > max_radius:
        raise ParameterError(f"max_radius {max_radius} too small for {n_theta} distinct points per ring")

    extent = int(math.floor(max_radius))
    ys, xs = np.mgrid[-extent : extent + 1, -extent : extent + 1]
    inside = (xs**2 + ys**2 <= max_radius**2) & ((xs != 0) | (ys != 0))
    lattice = np.stack([xs[inside], ys[inside]], axis=1)
    n_ring_points = n_rho * n_theta
    if len(lattice) < n_ring_points:
        raise ParameterError(f"max_radius {max_radius} holds only {len(lattice)} points, {n_ring_points} needed")

    r_min = max(max_radius / n_rho, min_ring)
    radii = np.geomspace(r_min, max_radius, n_rho) if n_rho > 1 else np.array([float(max_radius)])
    thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta

    used = np.zeros(len(lattice), dtype=bool)
    lookup = {(int(x), int(y)): k for k, (x, y) in enumerate(lattice)}
    points = [(0, 0)]
    angles = [0.0]
    rings = [-1]
    nudged = 0
    for ring, radius in enumerate(radii):
        for theta in thetas:
            ideal = np.array([radius * math.cos(theta), radius * math.sin(theta)])
            x, y = (int(v) for v in round_half_away(ideal))
            k = lookup.get((x, y))
            if k is None or used[k]:
                dist = np.sum((lattice - ideal) ** 2, axis=1)
                dist[used] = np.inf
                # nearest free point; ties resolved by (y, x)
                order = np.lexsort((lattice[:, 0], lattice[:, 1], dist))
                k = int(order[0])
                nudged += 1
            used[k] = True
            points.append((int(lattice[k, 0]), int(lattice[k, 1])))
            angles.append(float(theta))
            rings.append(ring)

    if nudged:
        logger.debug(
            "log-polar grid (%d, %d, %.1f): %d points moved off collisions", n_rho, n_theta, max_radius, nudged
        )
    return LogPolarGrid(
        points=np.array(points, dtype=np.int64),
        n_rho=n_rho,
        n_theta=n_theta,
        max_radius=float(max_radius),
        radii=radii,
        angles=np.array(angles),
        rings=np.array(rings, dtype=np.int64),
    )


def enumerate_candidate_patterns(grid: LogPolarGrid) -> SamplingPatternSet:
    """All unordered pairs (p_a, p_b), a < b, in lexicographic index order"""
    pairs = np.array(list(itertools.combinations(range(len(grid)), 2)), dtype=np.intp).reshape(-1, 2)
    return SamplingPatternSet(grid.points[pairs[:, 0]], grid.points[pairs[:, 1]])


def random_patterns(candidates: SamplingPatternSet, count: int, seed: int) -> SamplingPatternSet:
    """Seeded uniform draw of `count` candidates without replacement"""
    if not 1 <= count <= len(candidates):
        raise ParameterError(f"count must be in [1, {len(candidates)}], got {count}")
    rng = np.random.default_rng(seed)
    return candidates.subset(rng.choice(len(candidates), size=count, replace=False))


def center_anchored_patterns(grid: LogPolarGrid, count: Optional[int] = None, seed: int = 0) -> SamplingPatternSet:
    """Pairs (centre, ring point), the fixed-centre pooling of self-similarity descriptors"""
    ring_idx = np.flatnonzero(grid.rings >= 0)
    if count is not None:
        if not 1 <= count <= len(ring_idx):
            raise ParameterError(f"count must be in [1, {len(ring_idx)}], got {count}")
        rng = np.random.default_rng(seed)
        ring_idx = np.sort(rng.choice(ring_idx, size=count, replace=False))
    targets = grid.points[ring_idx]
    return SamplingPatternSet(np.zeros_like(targets), targets, directions=grid.angles[ring_idx])


def default_patterns(
    patch_size: int = 5, support_size: int = 31, dim: int = 128, n_rho: int = 4, n_theta: int = 36, seed: int = 0
) -> SamplingPatternSet:
    """Randomized selection over the default candidate set, used when no learned patterns are supplied"""
    grid = generate_log_polar_grid(n_rho, n_theta, support_radius(patch_size, support_size))
    candidates = enumerate_candidate_patterns(grid)
    return random_patterns(candidates, min(dim, len(candidates)), seed)


def _format_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def format_patterns(patterns: SamplingPatternSet) -> str:
    lines = []
    for l, (s, t, w) in enumerate(zip(patterns.sources, patterns.targets, patterns.weights)):
        fields = [str(l)] + [_format_number(v) for v in (s[0], s[1], t[0], t[1])] + [repr(float(w))]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_patterns(text: str) -> SamplingPatternSet:
    """Parse "l sx sy tx ty weight" lines; blank lines and # comments are ignored"""
    sources: List[List[float]] = []
    targets: List[List[float]] = []
    weights: List[float] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(f"pattern line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            index = int(parts[0])
            sx, sy, tx, ty, w = (float(p) for p in parts[1:])
        except ValueError as e:
            raise FormatError(f"pattern line {lineno}: {e}") from e
        if index != len(sources):
            raise FormatError(f"pattern line {lineno}: expected index {len(sources)}, got {index}")
        sources.append([sx, sy])
        targets.append([tx, ty])
        weights.append(w)
    if not sources:
        raise FormatError("pattern file contains no patterns")
    try:
        return SamplingPatternSet(np.array(sources), np.array(targets), np.array(weights))
    except ParameterError as e:
        raise FormatError(f"invalid pattern file: {e}") from e


def write_patterns(path: Union[str, Path], patterns: SamplingPatternSet) -> None:
    try:
        Path(path).write_text(format_patterns(patterns))
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def read_patterns(path: Union[str, Path]) -> SamplingPatternSet:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e
    return parse_patterns(text)
