"""
Dense adaptive self-correlation descriptors:
- Log-polar grids, candidate and randomized sampling patterns, pattern files
- The efficient filtering pipeline and its direct nested-loop counterpart
- The local self-similarity baseline
- The binary descriptor container
"""

from .dasc import DascParams, Interpolation, compute_dasc, dasc_responses, robust_similarity
from .dump import DescriptorField, read_descriptors, write_descriptors
from .lss import LssParams, compute_lss
from .oracle import compute_dasc_oracle, dasc_responses_oracle
from .patterns import (
    LogPolarGrid,
    SamplingPatternSet,
    center_anchored_patterns,
    default_patterns,
    enumerate_candidate_patterns,
    generate_log_polar_grid,
    random_patterns,
    read_patterns,
    support_radius,
    write_patterns,
)

__all__ = [
    "DascParams",
    "Interpolation",
    "compute_dasc",
    "dasc_responses",
    "robust_similarity",
    "DescriptorField",
    "read_descriptors",
    "write_descriptors",
    "LssParams",
    "compute_lss",
    "compute_dasc_oracle",
    "dasc_responses_oracle",
    "LogPolarGrid",
    "SamplingPatternSet",
    "center_anchored_patterns",
    "default_patterns",
    "enumerate_candidate_patterns",
    "generate_log_polar_grid",
    "random_patterns",
    "read_patterns",
    "support_radius",
    "write_patterns",
]
