from dataclasses import dataclass
from enum import StrEnum
from typing import Optional

import numpy as np

from ..factory import ProceduralDataset, register_dataset
from ..matching.wta import DisparityMap
from .textures import smooth_texture


class Photometric(StrEnum):
    IDENTITY = "identity"
    AFFINE = "affine"
    INVERT = "invert"


@dataclass
class ShiftedStereoConfig:
    """
    Configuration for textured stereo pairs with one constant disparity.

    - height, width: image size
    - disparity: true disparity, left(x, y) <-> right(x - d, y)
    - photometric: change applied to the right image
    - gain, bias: parameters of the affine change
    - seed: Optional seed for reproducibility.
    - size: Number of pairs in the virtual dataset.
    """

    height: int = 48
    width: int = 64
    disparity: int = 7
    photometric: Photometric = Photometric.IDENTITY
    gain: float = 0.5
    bias: float = 0.2
    seed: Optional[int] = None
    size: int = 10

    def validate(self) -> None:
        """Validate configuration parameters."""
        assert self.height >= 8 and self.width >= 8, "images must be at least 8x8"
        assert 0 <= self.disparity < self.width, "disparity must be in [0, width)"
        assert self.photometric in {p.value for p in Photometric}, "unknown photometric change"
        assert self.gain != 0, "gain must be non-zero"


class ShiftedStereoDataset(ProceduralDataset):
    """Left view is a texture crop, right view the crop displaced by the disparity"""

    def __init__(self, config: ShiftedStereoConfig):
        super().__init__(config=config, seed=config.seed, size=config.size)

    def __getitem__(self, idx: int) -> dict:
        cfg = self.config
        d = cfg.disparity
        texture = smooth_texture(self.rng(idx), cfg.height, cfg.width + d)
        left = texture[:, : cfg.width]
        right = texture[:, d : cfg.width + d]

        photometric = Photometric(cfg.photometric)
        if photometric == Photometric.AFFINE:
            right = cfg.gain * right + cfg.bias
        elif photometric == Photometric.INVERT:
            right = 1.0 - right

        valid = np.zeros((cfg.height, cfg.width), dtype=bool)
        valid[:, d:] = True
        return {
            "image_a": left,
            "image_b": right,
            "ground_truth": DisparityMap(np.full((cfg.height, cfg.width), float(d)), valid),
            "metadata": {"disparity": d, "photometric": str(photometric)},
        }


register_dataset("shifted_stereo", ShiftedStereoDataset, ShiftedStereoConfig)
