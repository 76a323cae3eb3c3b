"""Pairs related by a scaling and rotation about the image centre.

B(x') = A(T^-1 x') with T x = c + s * R(theta) (x - c). The ground truth carries the dense
flow of A into B, the constant geometric fields of both views and region annotations.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from ..factory import ProceduralDataset, register_dataset
from ..matching.wta import FlowField
from .textures import region_labels, smooth_texture


@dataclass
class ScaledRotatedConfig:
    """
    Configuration for scaled and rotated texture pairs.

    - image_size: side of the square images
    - scale: scale factor s of the transform
    - angle_deg: rotation angle of the transform in degrees
    - texture_scale: multiplier on the texture smoothing scales
    - n_regions: number of annotated regions in view A
    - seed: Optional seed for reproducibility.
    - size: Number of pairs in the virtual dataset.
    """

    image_size: int = 96
    scale: float = 1.5
    angle_deg: float = 30.0
    texture_scale: float = 1.5
    n_regions: int = 6
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.image_size >= 16, "image_size must be at least 16"
        assert self.scale > 0, "scale must be positive"
        assert self.texture_scale > 0, "texture_scale must be positive"
        assert self.n_regions >= 1, "n_regions must be at least 1"

    @property
    def angle(self) -> float:
        return math.radians(self.angle_deg)

    def linear_part(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return self.scale * np.array([[c, -s], [s, c]])


class ScaledRotatedDataset(ProceduralDataset):
    def __init__(self, config: ScaledRotatedConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    @property
    def center(self) -> float:
        return (self.config.image_size - 1) / 2.0

    def _inverse_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) in A of every pixel of B"""
        n = self.config.image_size
        inv = np.linalg.inv(self.config.linear_part())
        ys, xs = np.indices((n, n), dtype=np.float64)
        dx, dy = xs - self.center, ys - self.center
        src_x = self.center + inv[0, 0] * dx + inv[0, 1] * dy
        src_y = self.center + inv[1, 0] * dx + inv[1, 1] * dy
        return src_x, src_y

    def _flow(self) -> FlowField:
        n = self.config.image_size
        lin = self.config.linear_part()
        ys, xs = np.indices((n, n), dtype=np.float64)
        dx, dy = xs - self.center, ys - self.center
        tx = self.center + lin[0, 0] * dx + lin[0, 1] * dy
        ty = self.center + lin[1, 0] * dx + lin[1, 1] * dy
        inside = (tx >= 0) & (tx <= n - 1) & (ty >= 0) & (ty <= n - 1)
        return FlowField(np.stack([tx - xs, ty - ys], axis=2), inside)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        n = cfg.image_size
        rng = self.rng(idx)
        image_a = smooth_texture(rng, n, n, sigmas=tuple(cfg.texture_scale * s for s in (1.0, 2.0, 4.0)))
        annot_a = region_labels(rng, n, n, cfg.n_regions)

        src_x, src_y = self._inverse_coordinates()
        coords = np.array([src_y, src_x])
        image_b = np.clip(ndimage.map_coordinates(image_a, coords, order=3, mode="nearest"), 0.0, 1.0)

        inside = (src_x >= -0.5) & (src_x < n - 0.5) & (src_y >= -0.5) & (src_y < n - 0.5)
        near_x = np.clip(np.floor(src_x + 0.5).astype(np.int64), 0, n - 1)
        near_y = np.clip(np.floor(src_y + 0.5).astype(np.int64), 0, n - 1)
        annot_b = np.where(inside, annot_a[near_y, near_x], 0)

        return {
            "image_a": image_a,
            "image_b": image_b,
            "ground_truth": self._flow(),
            "annotation_a": annot_a,
            "annotation_b": annot_b,
            "fields_a": (1.0, 0.0),
            "fields_b": (cfg.scale, cfg.angle % (2 * math.pi)),
            "metadata": {"scale": cfg.scale, "angle_deg": cfg.angle_deg, "center": (self.center, self.center)},
        }


register_dataset("scaled_rotated", ScaledRotatedDataset, ScaledRotatedConfig)
