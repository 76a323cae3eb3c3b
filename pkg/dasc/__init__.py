"""
DASC - Dense adaptive self-correlation descriptors for matching across imaging modalities
"""

from . import descriptor, geometry, imaging, learning, matching, synthetic
from .factory import create_dataset, register_dataset

__version__ = "0.1.0"
__all__ = [
    "descriptor",
    "geometry",
    "imaging",
    "learning",
    "matching",
    "synthetic",
    "create_dataset",
    "register_dataset",
]
