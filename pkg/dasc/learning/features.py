"""Training pairs and their per-candidate similarity features"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from ..descriptor.dasc import DascParams, check_support, correlation_from_moments, robust_similarity
from ..descriptor.patterns import SamplingPatternSet
from ..errors import DimensionError, FormatError, ImageIOError, ParameterError
from ..imaging.core import check_image
from ..imaging.eaf import make_filter
from ..imaging.io import read_image

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class TrainingPair:
    """Two support windows and whether they depict the same point (1) or not (0)"""

    window_a: npt.NDArray[np.float64]
    window_b: npt.NDArray[np.float64]
    label: int

    def __post_init__(self):
        self.window_a = check_image(self.window_a, "window_a")
        self.window_b = check_image(self.window_b, "window_b")
        if self.window_a.shape != self.window_b.shape:
            raise DimensionError(f"training windows differ in shape: {self.window_a.shape} vs {self.window_b.shape}")
        if self.window_a.shape[0] != self.window_a.shape[1]:
            raise DimensionError(f"training windows must be square, got {self.window_a.shape}")
        if self.label not in (0, 1):
            raise ParameterError(f"label must be 0 or 1, got {self.label}")


def read_manifest(path: Union[str, Path]) -> List[TrainingPair]:
    """Read "path_a,path_b,label" rows; relative paths resolve against the manifest's directory"""
    path = Path(path)
    try:
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ImageIOError(f"cannot read {path}: {e}") from e

    pairs = []
    for lineno, row in enumerate(rows, start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 3:
            raise FormatError(f"{path}:{lineno}: expected path_a,path_b,label")
        if lineno == 1 and row[2].strip() == "label":
            continue
        try:
            label = int(row[2])
        except ValueError as e:
            raise FormatError(f"{path}:{lineno}: bad label {row[2]!r}") from e
        if label not in (0, 1):
            raise FormatError(f"{path}:{lineno}: label must be 0 or 1")
        window_a = read_image(path.parent / row[0].strip())
        window_b = read_image(path.parent / row[1].strip())
        try:
            pairs.append(TrainingPair(window_a, window_b, label))
        except DimensionError as e:
            raise FormatError(f"{path}:{lineno}: {e}") from e
    logger.info("read %d training pairs from %s", len(pairs), path)
    return pairs


def center_responses(window: npt.ArrayLike, candidates: SamplingPatternSet, params: DascParams) -> np.ndarray:
    """Robust similarity (before normalisation) of every candidate at the window centre"""
    window = check_image(window, "window")
    params.validate()
    check_support(candidates, params)
    if not candidates.is_integral:
        raise ParameterError("candidate patterns must have integer offsets")

    flt = make_filter(window, params.filter_params())
    h, w = window.shape
    cy, cx = h // 2, w // 2
    sources = candidates.sources.astype(np.int64)
    d = (candidates.targets - candidates.sources).astype(np.int64)

    groups: Dict[Tuple[int, int], List[int]] = {}
    for l, (sx, sy) in enumerate(sources):
        groups.setdefault((int(sx), int(sy)), []).append(l)

    out = np.empty(len(candidates), dtype=np.float64)
    for (sx, sy), members in groups.items():
        idx = np.array(members)
        pw = flt.weights_at(int(np.clip(cy + sy, 0, h - 1)), int(np.clip(cx + sx, 0, w - 1)))
        fi = window[pw.rows, pw.cols]
        g_i = np.dot(pw.weights, fi)
        var_i = np.dot(pw.weights, fi * fi) - g_i * g_i
        rows = np.clip(pw.rows[None, :] + d[idx, 1:2], 0, h - 1)
        cols = np.clip(pw.cols[None, :] + d[idx, 0:1], 0, w - 1)
        fj = window[rows, cols]
        g_j = fj @ pw.weights
        g_j2 = (fj * fj) @ pw.weights
        g_ij = (fj * fi[None, :]) @ pw.weights
        psi = correlation_from_moments(g_i, var_i, g_j, g_j2, g_ij)
        out[idx] = robust_similarity(psi, params.sigma_c, params.tau_c)
    return out


def build_pair_features(
    pair: TrainingPair, candidates: SamplingPatternSet, params: DascParams, sigma_r: float = 0.5
) -> np.ndarray:
    """r_l = exp(-(d_l^a - d_l^b)^2 / (2 sigma_r^2)) over all candidates"""
    if sigma_r <= 0:
        raise ParameterError(f"sigma_r must be > 0, got {sigma_r}")
    da = center_responses(pair.window_a, candidates, params)
    db = center_responses(pair.window_b, candidates, params)
    return np.exp(-((da - db) ** 2) / (2.0 * sigma_r * sigma_r))


def extract_features(
    pairs: Sequence[TrainingPair],
    candidates: SamplingPatternSet,
    params: DascParams,
    sigma_r: float = 0.5,
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Feature matrix (n_pairs, n_candidates) and label vector"""

    def features(pair: TrainingPair) -> np.ndarray:
        return build_pair_features(pair, candidates, params, sigma_r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(features, pairs))
    else:
        rows = [features(p) for p in pairs]
    x = np.vstack(rows) if rows else np.empty((0, len(candidates)))
    y = np.array([p.label for p in pairs], dtype=np.int64)
    logger.debug("extracted %d x %d training features", *x.shape)
    return x, y
