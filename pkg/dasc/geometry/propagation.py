"""Sparse-to-dense geometric fields over superpixels.

Each field g solves (P + mu (U - W)) g = P g*, where P flags superpixels holding
sparse evidence g*, W is the superpixel affinity and U its degree matrix. Scale is
propagated as log-scale, rotation as its cosine and sine.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import cg, spsolve

from ..errors import DimensionError, FormatError, ImageIOError, ParameterError
from .superpixels import SuperpixelMap
from .wmsd import Keypoint

logger = logging.getLogger(__name__)

RESIDUAL_LIMIT = 1e-6


@dataclass
class PropagationConfig:
    mu: float = 1.0
    rtol: float = 1e-8

    def validate(self) -> None:
        assert self.mu >= 0 and math.isfinite(self.mu), "mu must be finite and >= 0"
        assert 0 < self.rtol < 1, "rtol must be in (0, 1)"


@dataclass(eq=False)
class GeometricFieldMap:
    """Per-superpixel scale, rotation (radians) and constraint flags"""

    g_rho: npt.NDArray[np.float64]
    g_theta: npt.NDArray[np.float64]
    constrained: npt.NDArray[np.bool_]
    unconstrained_fallback: bool = field(default=False)

    def __post_init__(self):
        self.g_rho = np.asarray(self.g_rho, dtype=np.float64).reshape(-1)
        self.g_theta = np.asarray(self.g_theta, dtype=np.float64).reshape(-1)
        self.constrained = np.asarray(self.constrained, dtype=bool).reshape(-1)
        if not len(self.g_rho) == len(self.g_theta) == len(self.constrained):
            raise DimensionError("scale, rotation and constraint arrays differ in length")

    def __len__(self) -> int:
        return len(self.g_rho)

    @classmethod
    def uniform(cls, count: int, g_rho: float = 1.0, g_theta: float = 0.0) -> "GeometricFieldMap":
        return cls(np.full(count, g_rho), np.full(count, g_theta), np.zeros(count, dtype=bool))

    def pixel_maps(self, spmap: SuperpixelMap):
        """Dense (H, W) scale and rotation maps"""
        return self.g_rho[spmap.labels], self.g_theta[spmap.labels]


def circular_mean(angles: npt.ArrayLike) -> float:
    angles = np.asarray(angles, dtype=np.float64)
    mean = math.atan2(float(np.sin(angles).mean()), float(np.cos(angles).mean()))
    return mean % (2.0 * math.pi)


def fit_sparse_fields(
    keypoints: Sequence[Keypoint], spmap: SuperpixelMap, base_sigma: float = 1.0
) -> GeometricFieldMap:
    """Average keypoint scale (relative to base_sigma) and circular-mean rotation per superpixel"""
    if base_sigma <= 0:
        raise ParameterError(f"base_sigma must be > 0, got {base_sigma}")
    h, w = spmap.shape
    scales: List[List[float]] = [[] for _ in range(spmap.count)]
    angles: List[List[float]] = [[] for _ in range(spmap.count)]
    for kp in keypoints:
        row = min(max(int(round(kp.y)), 0), h - 1)
        col = min(max(int(round(kp.x)), 0), w - 1)
        m = spmap.labels[row, col]
        scales[m].append(kp.rho / base_sigma)
        angles[m].append(kp.theta)

    fields = GeometricFieldMap.uniform(spmap.count)
    for m in range(spmap.count):
        if scales[m]:
            fields.g_rho[m] = float(np.mean(scales[m]))
            fields.g_theta[m] = circular_mean(angles[m])
            fields.constrained[m] = True
    logger.debug("%d of %d superpixels hold keypoints", int(fields.constrained.sum()), spmap.count)
    return fields


def _check_weights(weights, n: int) -> sparse.csr_matrix:
    weights = sparse.csr_matrix(weights, dtype=np.float64)
    if weights.shape != (n, n):
        raise DimensionError(f"affinity shape {weights.shape} does not match {n} superpixels")
    if weights.nnz and weights.data.min() < 0:
        raise ParameterError("affinities must be non-negative")
    return weights


def solve_field(
    weights, constrained: npt.ArrayLike, values: npt.ArrayLike, mu: float = 1.0, rtol: float = 1e-8
) -> npt.NDArray[np.float64]:
    """Solve (P + mu (U - W)) g = P g* for one scalar field.

    Components of the affinity graph without any constraint (every superpixel when
    mu = 0) take the mean of the constrained values.
    """
    constrained = np.asarray(constrained, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    n = len(constrained)
    if values.shape != (n,):
        raise DimensionError(f"{values.size} values for {n} superpixels")
    if not constrained.any():
        raise ParameterError("at least one constrained superpixel is required")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    weights = _check_weights(weights, n)

    fallback = float(values[constrained].mean())
    solution = np.full(n, fallback)
    if mu == 0:
        solution[constrained] = values[constrained]
        return solution

    _, component = csgraph.connected_components(weights, directed=False)
    anchored = np.zeros(component.max() + 1, dtype=bool)
    anchored[component[constrained]] = True
    active = np.flatnonzero(anchored[component])

    sub_w = weights[active][:, active]
    degree = np.asarray(sub_w.sum(axis=1)).ravel()
    p = constrained[active].astype(np.float64)
    system = (sparse.diags(p + mu * degree) - mu * sub_w).tocsr()
    rhs = p * values[active]

    x, info = cg(system, rhs, x0=np.full(len(active), fallback), rtol=rtol, maxiter=10 * n)
    residual = float(np.abs(system @ x - rhs).max()) if len(active) else 0.0
    if info != 0 or residual > RESIDUAL_LIMIT:
        logger.warning("conjugate gradient stopped at residual %.3g (info %d); solving directly", residual, info)
        x = spsolve(system.tocsc(), rhs)
    solution[active] = x
    return solution


def propagate(
    fields: GeometricFieldMap, weights, mu: float = 1.0, workers: int = 1, rtol: float = 1e-8
) -> GeometricFieldMap:
    """Dense fields from sparse evidence; without any evidence every superpixel gets (1, 0)"""
    PropagationConfig(mu=mu, rtol=rtol).validate()
    n = len(fields)
    if not fields.constrained.any():
        logger.warning("no superpixel holds geometric evidence; using unit scale and zero rotation")
        result = GeometricFieldMap.uniform(n)
        result.unconstrained_fallback = True
        return result
    if np.any(fields.g_rho[fields.constrained] <= 0):
        raise ParameterError("constrained scales must be > 0")

    sources = [
        np.log(np.where(fields.constrained, fields.g_rho, 1.0)),
        np.cos(fields.g_theta),
        np.sin(fields.g_theta),
    ]

    def solve(values: np.ndarray) -> np.ndarray:
        return solve_field(weights, fields.constrained, values, mu, rtol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, 3)) as pool:
            log_rho, cos_t, sin_t = pool.map(solve, sources)
    else:
        log_rho, cos_t, sin_t = (solve(v) for v in sources)

    g_theta = np.mod(np.arctan2(sin_t, cos_t), 2.0 * math.pi)
    return GeometricFieldMap(np.exp(log_rho), g_theta, fields.constrained.copy())


def format_fields(fields: GeometricFieldMap) -> str:
    return "".join(
        f"{m} {fields.g_rho[m]!r} {fields.g_theta[m]!r} {int(fields.constrained[m])}\n" for m in range(len(fields))
    )


def parse_fields(text: str, count: Optional[int] = None) -> GeometricFieldMap:
    """Parse "m G_rho G_theta p" lines; a single line applies to all `count` superpixels"""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"field line {lineno}: expected m G_rho G_theta p")
        try:
            m, g_rho, g_theta, p = int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as e:
            raise FormatError(f"field line {lineno}: {e}") from e
        if g_rho <= 0 or p not in (0, 1):
            raise FormatError(f"field line {lineno}: scale must be > 0 and p 0 or 1")
        rows.append((m, g_rho, g_theta, p))
    if not rows:
        raise FormatError("field file is empty")

    if len(rows) == 1 and count is not None:
        _, g_rho, g_theta, p = rows[0]
        return GeometricFieldMap(np.full(count, g_rho), np.full(count, g_theta), np.full(count, bool(p)))
    if [r[0] for r in rows] != list(range(len(rows))):
        raise FormatError("field lines must list superpixels 0..N-1 in order")
    if count is not None and len(rows) != count:
        raise FormatError(f"field file lists {len(rows)} superpixels, segmentation has {count}")
    data = np.array([r[1:] for r in rows], dtype=np.float64)
    return GeometricFieldMap(data[:, 0], data[:, 1], data[:, 2].astype(bool))


def write_fields(path: Union[str, Path], fields: GeometricFieldMap) -> None:
    try:
        Path(path).write_text(format_fields(fields))
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}") from e


def read_fields(path: Union[str, Path], count: Optional[int] = None) -> GeometricFieldMap:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e
    return parse_fields(text, count)
