"""
Matching and evaluation:
- Winner-takes-all stereo and flow search over descriptor fields
- Bad-pixel rate, label transfer error, endpoint error, descriptor distance
- PFM, 16-bit PGM disparity and .flo files
"""

from .io import (
    read_disparity_pfm,
    read_disparity_pgm,
    read_flo,
    read_pfm,
    write_disparity_pfm,
    write_disparity_pgm,
    write_flo,
    write_pfm,
)
from .metrics import (
    bad_pixel_rate,
    descriptor_distance,
    endpoint_error,
    flow_bad_pixel_rate,
    label_transfer_error,
    transfer_labels,
)
from .wta import DisparityMap, FlowField, match_flow_wta, match_stereo_wta, raw_intensity_stereo_wta

__all__ = [
    "read_disparity_pfm",
    "read_disparity_pgm",
    "read_flo",
    "read_pfm",
    "write_disparity_pfm",
    "write_disparity_pgm",
    "write_flo",
    "write_pfm",
    "bad_pixel_rate",
    "descriptor_distance",
    "endpoint_error",
    "flow_bad_pixel_rate",
    "label_transfer_error",
    "transfer_labels",
    "DisparityMap",
    "FlowField",
    "match_flow_wta",
    "match_stereo_wta",
    "raw_intensity_stereo_wta",
]
