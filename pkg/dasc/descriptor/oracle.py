"""Direct nested-loop evaluation of the descriptor, pixel by pixel.

The asymmetric form weights both patches with the weights of the source patch and
must agree with the filtering pipeline in `dasc.py`. The symmetric form applies the
source weights to the source patch and the target weights to the target patch;
it has no filtering decomposition and exists only here.
"""

import logging

import numpy as np
import numpy.typing as npt

from ..errors import ParameterError
from ..imaging.core import check_image
from ..imaging.eaf import WeightedFilter, make_filter
from .dasc import DascParams, VAR_FLOOR, check_finite, check_support, normalize_responses, robust_similarity
from .dump import DescriptorField
from .patterns import SamplingPatternSet

logger = logging.getLogger(__name__)


def _weight_tables(flt: WeightedFilter):
    """Per-pixel weight lists stacked into (H, W, K) arrays"""
    h, w = flt.shape
    first = flt.weights_at(0, 0)
    k = len(first.weights)
    tables = {name: np.empty((h, w, k), dtype=np.int64) for name in ("rows", "cols", "dy", "dx")}
    weights = np.empty((h, w, k), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            pw = flt.weights_at(y, x)
            tables["rows"][y, x] = pw.rows
            tables["cols"][y, x] = pw.cols
            tables["dy"][y, x] = pw.dy
            tables["dx"][y, x] = pw.dx
            weights[y, x] = pw.weights
    return tables, weights


def _integral_offsets(patterns: SamplingPatternSet):
    if not patterns.is_integral:
        raise ParameterError("the direct descriptor path needs integer pattern offsets")
    return patterns.sources.astype(np.int64), patterns.targets.astype(np.int64)


def _asymmetric_responses(img: np.ndarray, flt: WeightedFilter, patterns: SamplingPatternSet, params: DascParams):
    h, w = img.shape
    sources, targets = _integral_offsets(patterns)
    d = targets - sources
    tables, weights = _weight_tables(flt)
    out = np.empty((h, w, len(patterns)), dtype=np.float64)

    for y in range(h):
        for x in range(w):
            py = np.clip(y + sources[:, 1], 0, h - 1)
            px = np.clip(x + sources[:, 0], 0, w - 1)
            rows = tables["rows"][py, px]
            cols = tables["cols"][py, px]
            wt = weights[py, px]
            fi = img[rows, cols]
            fj = img[np.clip(rows + d[:, 1:2], 0, h - 1), np.clip(cols + d[:, 0:1], 0, w - 1)]

            g_i = np.sum(wt * fi, axis=1)
            g_i2 = np.sum(wt * fi * fi, axis=1)
            g_j = np.sum(wt * fj, axis=1)
            g_j2 = np.sum(wt * fj * fj, axis=1)
            g_ij = np.sum(wt * fi * fj, axis=1)

            var_i = g_i2 - g_i * g_i
            var_j = g_j2 - g_j * g_j
            psi = np.zeros(len(patterns))
            ok = (var_i >= VAR_FLOOR) & (var_j >= VAR_FLOOR)
            psi[ok] = (g_ij[ok] - g_i[ok] * g_j[ok]) / np.sqrt(var_i[ok] * var_j[ok])
            out[y, x] = robust_similarity(np.clip(psi, -1.0, 1.0), params.sigma_c, params.tau_c)
    return out


def _local_kernels(flt: WeightedFilter):
    """Weights of every pixel aggregated over virtual offsets into a (H, W, S, S) kernel"""
    tables, weights = _weight_tables(flt)
    reach = int(max(np.abs(tables["dy"]).max(), np.abs(tables["dx"]).max()))
    size = 2 * reach + 1
    h, w = flt.shape
    kernels = np.zeros((h, w, size, size), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            np.add.at(kernels[y, x], (tables["dy"][y, x] + reach, tables["dx"][y, x] + reach), weights[y, x])
    return kernels, reach


def _symmetric_responses(img: np.ndarray, flt: WeightedFilter, patterns: SamplingPatternSet, params: DascParams):
    h, w = img.shape
    sources, targets = _integral_offsets(patterns)
    kernels, reach = _local_kernels(flt)
    rho = np.arange(-reach, reach + 1)
    rho_y, rho_x = np.meshgrid(rho, rho, indexing="ij")
    out = np.empty((h, w, len(patterns)), dtype=np.float64)

    def patch(cy: np.ndarray, cx: np.ndarray):
        # (L, S, S) kernels and values of the patches centred at (cy, cx); pairs are aligned by offset
        k = kernels[cy, cx]
        v = img[np.clip(cy[:, None, None] + rho_y, 0, h - 1), np.clip(cx[:, None, None] + rho_x, 0, w - 1)]
        mean = np.sum(k * v, axis=(1, 2))
        return k * (v - mean[:, None, None]), k

    for y in range(h):
        for x in range(w):
            ws, ks = patch(np.clip(y + sources[:, 1], 0, h - 1), np.clip(x + sources[:, 0], 0, w - 1))
            wt, kt = patch(np.clip(y + targets[:, 1], 0, h - 1), np.clip(x + targets[:, 0], 0, w - 1))
            num = np.sum(ws * wt, axis=(1, 2))
            ss = np.sum(ws * ws, axis=(1, 2))
            tt = np.sum(wt * wt, axis=(1, 2))
            ok = (ss >= VAR_FLOOR * np.sum(ks * ks, axis=(1, 2))) & (tt >= VAR_FLOOR * np.sum(kt * kt, axis=(1, 2)))
            psi = np.zeros(len(patterns))
            psi[ok] = num[ok] / np.sqrt(ss[ok] * tt[ok])
            out[y, x] = robust_similarity(np.clip(psi, -1.0, 1.0), params.sigma_c, params.tau_c)
    return out


def dasc_responses_oracle(
    img: npt.ArrayLike, patterns: SamplingPatternSet, params: DascParams, symmetric: bool = False
) -> np.ndarray:
    """Pre-normalisation responses computed by direct weighted sums"""
    img = check_image(img)
    params.validate()
    check_support(patterns, params)
    if len(patterns) == 0:
        raise ParameterError("at least one sampling pattern is required")
    flt = make_filter(img, params.filter_params())
    logger.debug("direct %s evaluation of %d patterns", "symmetric" if symmetric else "asymmetric", len(patterns))
    if symmetric:
        out = _symmetric_responses(img, flt, patterns, params)
    else:
        out = _asymmetric_responses(img, flt, patterns, params)
    check_finite(out, "descriptor response")
    return out


def compute_dasc_oracle(
    img: npt.ArrayLike, patterns: SamplingPatternSet, params: DascParams, symmetric: bool = False
) -> DescriptorField:
    return DescriptorField(normalize_responses(dasc_responses_oracle(img, patterns, params, symmetric)))
