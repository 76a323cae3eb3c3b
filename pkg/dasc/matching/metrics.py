"""Correspondence quality metrics"""

import logging
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from ..descriptor.dump import DescriptorField, as_descriptor_values
from ..errors import DimensionError, UndefinedMetricError
from .wta import DisparityMap, FlowField

logger = logging.getLogger(__name__)


def _as_disparity(d: Union[DisparityMap, npt.ArrayLike]) -> DisparityMap:
    return d if isinstance(d, DisparityMap) else DisparityMap(d)


def _as_flow(f: Union[FlowField, npt.ArrayLike]) -> FlowField:
    return f if isinstance(f, FlowField) else FlowField(f)


def _resolve_mask(default: np.ndarray, mask: Optional[npt.ArrayLike]) -> np.ndarray:
    if mask is None:
        return default
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != default.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match {default.shape}")
    return mask & default


def bad_pixel_rate(
    est: Union[DisparityMap, npt.ArrayLike],
    gt: Union[DisparityMap, npt.ArrayLike],
    threshold: float = 1.0,
    mask: Optional[npt.ArrayLike] = None,
) -> float:
    """Fraction of masked pixels with |est - gt| > threshold"""
    est, gt = _as_disparity(est), _as_disparity(gt)
    if est.values.shape != gt.values.shape:
        raise DimensionError(f"disparity maps differ: {est.values.shape} vs {gt.values.shape}")
    mask = _resolve_mask(est.valid & gt.valid, mask)
    if not mask.any():
        raise UndefinedMetricError("bad-pixel rate over an empty mask")
    bad = np.abs(est.values[mask] - gt.values[mask]) > threshold
    return float(bad.mean())


def label_transfer_error(est_annot: npt.ArrayLike, gt_annot: npt.ArrayLike) -> float:
    """Fraction of labelled ground-truth pixels (label > 0) whose transferred label differs"""
    est = np.asarray(est_annot)
    gt = np.asarray(gt_annot)
    if est.shape != gt.shape:
        raise DimensionError(f"annotations differ: {est.shape} vs {gt.shape}")
    labelled = gt > 0
    total = int(labelled.sum())
    if total == 0:
        raise UndefinedMetricError("ground truth has no labelled pixels")
    return float(np.count_nonzero((est != gt) & labelled)) / total


def endpoint_error(
    flow: Union[FlowField, npt.ArrayLike],
    gt: Union[FlowField, npt.ArrayLike],
    mask: Optional[npt.ArrayLike] = None,
) -> float:
    """Mean Euclidean distance between flow vectors over masked pixels"""
    flow, gt = _as_flow(flow), _as_flow(gt)
    if flow.vectors.shape != gt.vectors.shape:
        raise DimensionError(f"flow fields differ: {flow.vectors.shape} vs {gt.vectors.shape}")
    mask = _resolve_mask(flow.valid & gt.valid, mask)
    if not mask.any():
        raise UndefinedMetricError("endpoint error over an empty mask")
    diff = flow.vectors[mask] - gt.vectors[mask]
    return float(np.hypot(diff[:, 0], diff[:, 1]).mean())


def flow_bad_pixel_rate(
    flow: Union[FlowField, npt.ArrayLike],
    gt: Union[FlowField, npt.ArrayLike],
    threshold: float = 1.0,
    mask: Optional[npt.ArrayLike] = None,
) -> float:
    """Fraction of masked pixels whose endpoint error exceeds `threshold`"""
    flow, gt = _as_flow(flow), _as_flow(gt)
    if flow.vectors.shape != gt.vectors.shape:
        raise DimensionError(f"flow fields differ: {flow.vectors.shape} vs {gt.vectors.shape}")
    mask = _resolve_mask(flow.valid & gt.valid, mask)
    if not mask.any():
        raise UndefinedMetricError("bad-pixel rate over an empty mask")
    diff = flow.vectors[mask] - gt.vectors[mask]
    return float((np.hypot(diff[:, 0], diff[:, 1]) > threshold).mean())


def _targets(flow: FlowField):
    h, w = flow.valid.shape
    ys, xs = np.indices((h, w))
    tx = np.rint(xs + flow.u).astype(np.int64)
    ty = np.rint(ys + flow.v).astype(np.int64)
    inside = flow.valid & (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    return tx, ty, inside


def transfer_labels(annotation_b: npt.ArrayLike, flow: Union[FlowField, npt.ArrayLike]) -> npt.NDArray[np.int64]:
    """Annotation of the second image pulled onto the first through the flow; 0 where the flow leaves the image"""
    annotation_b = np.asarray(annotation_b)
    flow = _as_flow(flow)
    if annotation_b.shape != flow.valid.shape:
        raise DimensionError(f"annotation {annotation_b.shape} does not match flow {flow.valid.shape}")
    tx, ty, inside = _targets(flow)
    out = np.zeros(annotation_b.shape, dtype=np.int64)
    out[inside] = annotation_b[ty[inside], tx[inside]]
    return out


def descriptor_distance(
    field_a: Union[DescriptorField, npt.ArrayLike],
    field_b: Union[DescriptorField, npt.ArrayLike],
    gt_flow: Union[FlowField, npt.ArrayLike],
    mask: Optional[npt.ArrayLike] = None,
) -> float:
    """Median Euclidean descriptor distance at ground-truth correspondences"""
    va, vb = as_descriptor_values(field_a), as_descriptor_values(field_b)
    gt_flow = _as_flow(gt_flow)
    if va.shape != vb.shape or va.shape[:2] != gt_flow.valid.shape:
        raise DimensionError("descriptor fields and flow must share dimensions")
    tx, ty, inside = _targets(gt_flow)
    inside = _resolve_mask(inside, mask)
    if not inside.any():
        raise UndefinedMetricError("no ground-truth correspondence inside both images")
    ys, xs = np.nonzero(inside)
    dist = np.linalg.norm(va[ys, xs] - vb[ty[ys, xs], tx[ys, xs]], axis=1)
    return float(np.median(dist))
