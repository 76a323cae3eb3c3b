"""
Image substrate shared by every other subpackage:
- Grayscale images, Gaussian blur and blur-only pyramids
- Shifted copies with replicate borders
- Constant-time box, Gaussian and guided filtering
- Raster file I/O
"""

from .core import (
    Image,
    Pyramid,
    build_pyramid,
    check_image,
    gaussian_blur,
    sample_shifted,
    shift_image,
    to_grayscale,
)
from .eaf import (
    BoxFilter,
    FilterKind,
    FilterParams,
    GaussianFilter,
    GuidedFilter,
    PixelWeights,
    WeightedFilter,
    box_filter,
    guided_filter,
    make_filter,
)
from .io import read_color_image, read_image, read_pgm16, read_raster, write_image, write_pgm16

__all__ = [
    "Image",
    "Pyramid",
    "build_pyramid",
    "check_image",
    "gaussian_blur",
    "sample_shifted",
    "shift_image",
    "to_grayscale",
    "BoxFilter",
    "FilterKind",
    "FilterParams",
    "GaussianFilter",
    "GuidedFilter",
    "PixelWeights",
    "WeightedFilter",
    "box_filter",
    "guided_filter",
    "make_filter",
    "read_color_image",
    "read_image",
    "read_pgm16",
    "read_raster",
    "write_image",
    "write_pgm16",
]
