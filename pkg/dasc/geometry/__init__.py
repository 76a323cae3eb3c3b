"""
Geometry-aware description:
- Weighted maximal self-dissimilarity keypoints with scale and orientation
- Superpixels, their affinities and sparse-to-dense geometric-field propagation
- Geometry-invariant descriptors computed per superpixel
"""

from .gi_dasc import BlurRule, GiDascConfig, TransformedPatternSet, blur_sigma, compute_gi_dasc, transform_patterns
from .propagation import (
    GeometricFieldMap,
    PropagationConfig,
    fit_sparse_fields,
    propagate,
    read_fields,
    solve_field,
    write_fields,
)
from .superpixels import SuperpixelConfig, SuperpixelMap, segment_superpixels, superpixel_affinity
from .wmsd import (
    Keypoint,
    ResponseStack,
    WmsdConfig,
    compute_response_stack,
    detect_keypoints,
    detect_wmsd,
    estimate_orientation,
    read_keypoints,
    response_map,
    self_dissimilarity,
    wmsd_patterns,
    write_keypoints,
)

__all__ = [
    "BlurRule",
    "GiDascConfig",
    "TransformedPatternSet",
    "blur_sigma",
    "compute_gi_dasc",
    "transform_patterns",
    "GeometricFieldMap",
    "PropagationConfig",
    "fit_sparse_fields",
    "propagate",
    "read_fields",
    "solve_field",
    "write_fields",
    "SuperpixelConfig",
    "SuperpixelMap",
    "segment_superpixels",
    "superpixel_affinity",
    "Keypoint",
    "ResponseStack",
    "WmsdConfig",
    "compute_response_stack",
    "detect_keypoints",
    "detect_wmsd",
    "estimate_orientation",
    "read_keypoints",
    "response_map",
    "self_dissimilarity",
    "wmsd_patterns",
    "write_keypoints",
]
